import json

from src.application.dto.certificate_document import CertificateDocument
from src.domain.entities.certificate import Method, Mode
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.services import mapping_service
from src.infrastructure.persistence.certificate_repository import CertificateRepository


def chain_certificate(chain2, ctx):
    p = PixelwiseMapping(tables=((0, 0), (0, 1)))
    _, certificate = mapping_service.eliminate(chain2, p, Method.L1, Mode.WEAK, ctx=ctx, y=(0, 0))
    return certificate


def test_document_fields(chain2, ctx):
    document = CertificateDocument.from_certificate(chain_certificate(chain2, ctx), "chain.txt")
    assert document.method == "l1"
    assert document.label_counts == [2, 2]
    assert document.eliminated == [[0, 1]]
    assert document.alive == [[0], [0, 1]]
    assert document.mapping == [[0, 0], [0, 1]]
    assert document.y == [0, 0]
    assert document.completeness == 50.0
    assert document.verification.improving


def test_save_and_load(tmp_path, chain2, ctx):
    repository = CertificateRepository(base_dir=tmp_path)
    document = CertificateDocument.from_certificate(chain_certificate(chain2, ctx))
    path = repository.save_certificate(document, repository.resolve(None, "cert.json"))
    assert path == tmp_path / "cert.json"
    assert repository.load_certificate(path) == document


def test_several_certificates_form_a_list(tmp_path, chain2, ctx):
    repository = CertificateRepository(base_dir=tmp_path)
    document = CertificateDocument.from_certificate(chain_certificate(chain2, ctx))
    path = repository.save_certificates([document, document], tmp_path / "out" / "certs.json")
    payload = json.loads(path.read_text())
    assert [d["method"] for d in payload] == ["l1", "l1"]
