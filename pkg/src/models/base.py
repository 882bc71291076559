from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


def _to_array(value: Any) -> np.ndarray:
    array = np.asarray(value)
    if array.dtype.kind == "c":
        return array
    return array.astype(float)


def _to_list(array: np.ndarray) -> list:
    return array.tolist()


Array = Annotated[
    np.ndarray, BeforeValidator(_to_array), PlainSerializer(_to_list, return_type=list)
]


class ArrayModel(BaseModel):
    """Base for models that carry numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True)
