from pathlib import Path

import pytest
from sklearn.base import clone
from sklearn.pipeline import Pipeline

from complex_etl.estimators import AttributeExtractor, ObjectWrapper, XmlEmitter, XmlRelationalMapper
from complex_etl.extraction import load_manifest
from complex_etl.shredding import RowSet
from complex_etl.validation import NotFittedError
from complex_etl.xmlgen import canonical_xml

FEATURES = Path(__file__).parent / "fixtures" / "features"


def test_params_and_clone():
    est = XmlRelationalMapper(dtd=str(FEATURES / "star.dtd"), root="library")
    assert est.get_params() == {"dtd": str(FEATURES / "star.dtd"), "root": "library"}
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "schema_")


@pytest.mark.parametrize("est", [XmlEmitter(), XmlRelationalMapper()])
def test_not_fitted(est):
    with pytest.raises(NotFittedError):
        est.transform([])


def test_full_pipeline_round_trip(desk):
    pipe = Pipeline([
        ("extract", AttributeExtractor()),
        ("wrap", ObjectWrapper()),
        ("emit", XmlEmitter()),
    ])
    docs = pipe.fit_transform(load_manifest(desk))
    assert len(docs) == 6 and all(d.tag == "complex_object" for d in docs)
    mapper = XmlRelationalMapper().fit()
    assert all(r.ok for r in mapper.validate(docs))
    rowsets = mapper.transform(docs)
    assert all(isinstance(r, RowSet) for r in rowsets)
    rebuilt = mapper.inverse_transform(rowsets)
    assert [canonical_xml(d) for d in rebuilt] == [canonical_xml(d) for d in docs]


def test_mapper_infers_root_from_custom_dtd():
    mapper = XmlRelationalMapper(dtd=FEATURES / "nested_seq.dtd").fit()
    doc = (FEATURES / "nested_seq.xml").read_bytes()
    assert mapper.root_ == mapper.schema_.root
    (rebuilt,) = mapper.inverse_transform(mapper.transform(doc))
    assert canonical_xml(rebuilt) == canonical_xml(doc)


def test_type_errors_on_wrong_inputs():
    with pytest.raises(TypeError):
        ObjectWrapper().transform(["not attrs"])
    with pytest.raises(TypeError):
        XmlEmitter().fit().transform([42])
    with pytest.raises(TypeError):
        XmlRelationalMapper(dtd=3.5).fit()
