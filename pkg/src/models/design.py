import hashlib
from typing import Optional

import yaml
from pydantic import BaseModel

from src.models.control import BandPass, FlexGains, RigidBodyDesign
from src.models.observer import ObserverBank
from src.models.weighting import WeightingScheme


class DesignFile(BaseModel):
    """Everything the runtime loop needs, serialized as YAML text."""

    config_hash: str
    bank: ObserverBank
    scheme: WeightingScheme
    flex_gains: FlexGains
    bandpass: BandPass
    rb_design: RigidBodyDesign
    training_samples: Optional[int] = None

    def to_yaml(self) -> str:
        payload = self.model_dump(mode="json", exclude={"bank": {"state": True}})
        for observer in payload["bank"]["observers"]:
            observer.pop("state", None)
        return yaml.safe_dump(payload, sort_keys=False, default_flow_style=None, width=120)

    @classmethod
    def from_yaml(cls, text: str) -> "DesignFile":
        return cls.model_validate(yaml.safe_load(text))

    def write(self, path: str) -> str:
        text = self.to_yaml()
        with open(path, "w") as file:
            file.write(text)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    @classmethod
    def read(cls, path: str) -> "DesignFile":
        with open(path, "r") as file:
            return cls.from_yaml(file.read())

    def digest(self) -> str:
        return hashlib.sha256(self.to_yaml().encode("utf-8")).hexdigest()
