"""Ontology term constants used by the mapper, checks and queries.

Every term IRI the package emits is defined here. Other modules import the
constants instead of building term IRIs from strings.

The collection-pattern namespace bound to ``odp`` can be overridden with the
``ANIML_KG_ODP_NAMESPACE`` environment variable (read at import time).
"""

from __future__ import annotations

import os

from animl_kg.graph import IRI, RDF_NS, XSD_NS

AML_NS = "http://www.w3id.org/animl/ontology/"
ODP_NS = os.environ.get(
    "ANIML_KG_ODP_NAMESPACE",
    "http://www.ontologydesignpatterns.org/cp/owl/collectionentity.owl#",
)
SEQ_NS = "http://www.ontologydesignpatterns.org/cp/owl/sequence.owl#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
SKOS_NS = "http://www.w3.org/2004/02/skos/core#"
SH_NS = "http://www.w3.org/ns/shacl#"


def _aml(local: str) -> IRI:
    return IRI(AML_NS + local)


RDF_TYPE = IRI(RDF_NS + "type")
RDF_JSON = RDF_NS + "JSON"

# xsd datatypes
XSD_INTEGER = XSD_NS + "integer"
XSD_DOUBLE = XSD_NS + "double"
XSD_FLOAT = XSD_NS + "float"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_DATETIME = XSD_NS + "dateTime"
XSD_BASE64 = XSD_NS + "base64Binary"
XSD_HEXBINARY = XSD_NS + "hexBinary"
XSD_STRING = XSD_NS + "string"

FLOAT_DATATYPES = frozenset({XSD_DOUBLE, XSD_FLOAT, XSD_DECIMAL})
BINARY_DATATYPES = frozenset({XSD_BASE64, XSD_HEXBINARY})

# -- classes ---------------------------------------------------------------
Document = _aml("Document")
Experiment = _aml("Experiment")
ExperimentStep = _aml("ExperimentStep")
SampleSet = _aml("SampleSet")
Sample = _aml("Sample")
Container = _aml("Container")
SampleInContainer = _aml("SampleInContainer")
Category = _aml("Category")
Parameter = _aml("Parameter")
SeriesSet = _aml("SeriesSet")
Series = _aml("Series")
DataPoint = _aml("DataPoint")
Method = _aml("Method")
Infrastructure = _aml("Infrastructure")
Result = _aml("Result")
Agent = _aml("Agent")
HumanAgent = _aml("HumanAgent")
SoftwareAgent = _aml("SoftwareAgent")
HardwareAgent = _aml("HardwareAgent")
Role = _aml("Role")
AuditTrail = _aml("AuditTrail")
AuditTrailEntry = _aml("AuditTrailEntry")
Change = _aml("Change")
SignableItem = _aml("SignableItem")
Signature = _aml("Signature")
SignatureSet = _aml("SignatureSet")
Technique = _aml("Technique")
Specification = _aml("Specification")
ParameterSpecification = _aml("ParameterSpecification")
SeriesSpecification = _aml("SeriesSpecification")
SeriesSetSpecification = _aml("SeriesSetSpecification")
DataPointSpecification = _aml("DataPointSpecification")
AnimlReferenceSpecification = _aml("AnimlReferenceSpecification")
ResultSpecification = _aml("ResultSpecification")
Unit = _aml("Unit")
PlotScale = _aml("PlotScale")
EncodingType = _aml("EncodingType")
BinaryEncodingType = _aml("BinaryEncodingType")
AnimlReference = _aml("AnimlReference")
AnimlReferenceSet = _aml("AnimlReferenceSet")
ValueType = _aml("ValueType")
Dependency = _aml("Dependency")
ContainerType = _aml("ContainerType")
RoleType = _aml("RoleType")
UseCase = _aml("UseCase")
ChangeAction = _aml("ChangeAction")

# -- object properties -----------------------------------------------------
hasMember = IRI(ODP_NS + "hasMember")
directlyPrecedes = IRI(SEQ_NS + "directlyPrecedes")
directlyFollows = IRI(SEQ_NS + "directlyFollows")
hasExperiment = _aml("hasExperiment")
hasSampleSet = _aml("hasSampleSet")
hasAuditTrail = _aml("hasAuditTrail")
hasSignatureSet = _aml("hasSignatureSet")
hasCategory = _aml("hasCategory")
hasParameter = _aml("hasParameter")
hasSeriesSet = _aml("hasSeriesSet")
hasSeries = _aml("hasSeries")
hasUnit = _aml("hasUnit")
hasMethod = _aml("hasMethod")
hasInfrastructure = _aml("hasInfrastructure")
hasResult = _aml("hasResult")
hasAgent = _aml("hasAgent")
hasRole = _aml("hasRole")
hasRoleType = _aml("hasRoleType")
requiresRole = _aml("requiresRole")
hasReferenceSet = _aml("hasReferenceSet")
pointsTo = _aml("pointsTo")
subject = _aml("subject")
hasUseCase = _aml("hasUseCase")
hasChange = _aml("hasChange")
hasAction = _aml("hasAction")
target = _aml("target")
hasAuthor = _aml("hasAuthor")
tracksAgent = _aml("tracksAgent")
signs = _aml("signs")
usesTechnique = _aml("usesTechnique")
extends = _aml("extends")
hasSpecification = _aml("hasSpecification")
hasDataPointSpecification = _aml("hasDataPointSpecification")
hasPlotScale = _aml("hasPlotScale")
hasEncodingType = _aml("hasEncodingType")
hasValueType = _aml("hasValueType")
allowedValueType = _aml("allowedValueType")
hasDependency = _aml("hasDependency")
hasContainerType = _aml("hasContainerType")
hasContainer = _aml("hasContainer")
hasSample = _aml("hasSample")

# -- data properties -------------------------------------------------------
id = _aml("id")  # noqa: A001 - ontology term name
name = _aml("name")
version = _aml("version")
citation = _aml("citation")
isImplemented = _aml("isImplemented")
isRequired = _aml("isRequired")
startValue = _aml("startValue")
endValue = _aml("endValue")
hasFunction = _aml("hasFunction")
value = _aml("value")
values = _aml("values")
label = _aml("label")
quantity = _aml("quantity")
factor = _aml("factor")
exponent = _aml("exponent")
length = _aml("length")
timestamp = _aml("timestamp")
reason = _aml("reason")
signerName = _aml("signerName")
phone = _aml("phone")
email = _aml("email")
operatingSystem = _aml("operatingSystem")
manufacturer = _aml("manufacturer")
serialNumber = _aml("serialNumber")
firmwareVersion = _aml("firmwareVersion")
location = _aml("location")
start = _aml("start")
increment = _aml("increment")
startIndex = _aml("startIndex")
endIndex = _aml("endIndex")
minValue = _aml("minValue")
maxValue = _aml("maxValue")

# -- individuals -----------------------------------------------------------
Author = _aml("Author")
Operator = _aml("Operator")
OtherRole = _aml("Other")
ROLE_TYPES = {"Author": Author, "Operator": Operator, "Other": OtherRole}

Creation = _aml("Creation")
Deletion = _aml("Deletion")
Modification = _aml("Modification")
CHANGE_ACTIONS = {"Creation": Creation, "Deletion": Deletion, "Modification": Modification}

Linear = _aml("Linear")
Log = _aml("Log")
Inverse = _aml("Inverse")
PLOT_SCALES = {"linear": Linear, "log": Log, "inverse": Inverse}

Independent = _aml("Independent")
Dependent = _aml("Dependent")
DEPENDENCIES = {"independent": Independent, "dependent": Dependent}

IndividualEncoding = _aml("IndividualEncoding")
AutoIncrementedEncoding = _aml("AutoIncrementedEncoding")
BinaryEncoding = _aml("BinaryEncoding")
ENCODINGS = {
    "Individual": IndividualEncoding,
    "AutoIncremented": AutoIncrementedEncoding,
    "Binary": BinaryEncoding,
}

Consumed = _aml("Consumed")
Produced = _aml("Produced")
USE_CASES = {"consumed": Consumed, "produced": Produced}

VALUE_TYPES = {
    t: _aml(t)
    for t in ("Int32", "Int64", "Float32", "Float64", "String", "Boolean", "DateTime", "Binary")
}
NUMERIC_VALUE_TYPES = frozenset(VALUE_TYPES[t] for t in ("Int32", "Int64", "Float32", "Float64"))

Simple = _aml("Simple")
CONTAINER_TYPES = {
    "simple": Simple,
    "wellplate": _aml("WellPlate"),
    "rack": _aml("Rack"),
    "tray": _aml("Tray"),
    "tube": _aml("Tube"),
    "vial": _aml("Vial"),
    "other": _aml("OtherContainerType"),
}

# -- standard terms --------------------------------------------------------
owl_equivalentClass = IRI(OWL_NS + "equivalentClass")
skos_relatedMatch = IRI(SKOS_NS + "relatedMatch")
skos_narrowMatch = IRI(SKOS_NS + "narrowMatch")
skos_broadMatch = IRI(SKOS_NS + "broadMatch")
part_of = IRI("http://purl.obolibrary.org/obo/BFO_0000050")


def declared_terms() -> frozenset[IRI]:
    """All IRIs defined in this module (classes, properties, individuals)."""
    out = set()
    for v in globals().values():
        if isinstance(v, IRI):
            out.add(v)
        elif isinstance(v, dict) and v and all(isinstance(x, IRI) for x in v.values()):
            out.update(v.values())
    return frozenset(out)
