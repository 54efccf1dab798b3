"""The bundled IBM HR Analytics attrition CSV and its schema."""
from importlib import resources
from pathlib import Path

from .tabular import CATEGORICAL, DROPPED_ID, TARGET, ColumnSchema, Table, load_csv

IBM_HR_FILENAME = "WA_Fn-UseC_-HR-Employee-Attrition.csv"
TARGET_COLUMN = "Attrition"
ID_COLUMN = "EmployeeNumber"


def ibm_hr_path() -> Path:
    return Path(str(resources.files("attrition") / "data" / IBM_HR_FILENAME))


def with_roles(table: Table, target: str = TARGET_COLUMN, id_columns=(ID_COLUMN,)) -> Table:
    """Mark ``target`` as the target and ``id_columns`` as identifiers."""
    schema = []
    for c in table.schema:
        role = TARGET if c.name == target else DROPPED_ID if c.name in id_columns else c.role
        kind = CATEGORICAL if c.name == target else c.kind
        schema.append(ColumnSchema(c.name, kind, role))
    return table.with_columns(schema, table.columns)


def load_ibm_hr(path=None) -> Table:
    table = load_csv(path or ibm_hr_path())
    return with_roles(table)


__all__ = ["ibm_hr_path", "load_ibm_hr", "with_roles", "TARGET_COLUMN"]
