import logging
import time
from abc import ABC, abstractmethod

from src.errors import StageError
from src.models import Data
from src.settings import StageConfig

logger = logging.getLogger(__name__)


class PipelineComponent(ABC):
    """
    Abstract base class for pipeline stages.

    Every stage is constructed with the validated configuration plus the resources and args
    named for it in the pipeline list, and reads from / writes to the shared Data object.

    Methods:
        process(data: Data) -> Data:
            Run the stage on the data.
        validate_input_data(data: Data):
            Check that the upstream stages produced what this stage needs.
        extract_input(data: Data):
            Extract input arguments from the Data object.
        run(*args):
            Run the stage's main logic.
        update_data(data: Data, result):
            Store the result on the data object.
    """

    def __init__(self, settings: StageConfig):
        self.settings = settings

    def process(self, data: Data) -> Data:
        """
        Process the data through the stage.

        Args:
            data (Data): The data to be processed.

        Returns:
            Data: The processed data.
        """
        name = self.__class__.__name__
        self.validate_input_data(data)
        inputs = self.extract_input(data)
        started = time.perf_counter()
        logger.info("%s started", name)
        try:
            if isinstance(inputs, tuple):  # Avoid unpacking if `inputs` is not a tuple
                result = self.run(*inputs)
            elif inputs is None:
                result = self.run()
            else:
                result = self.run(inputs)
        except StageError as e:
            e.stage = name
            logger.error("%s failed: %s", name, e)
            raise
        self.update_data(data, result)
        logger.info("%s finished in %.3f s", name, time.perf_counter() - started)
        return data

    def require(self, data: Data, *fields: str):
        """Raise ValueError naming this stage if any Data field is still unset."""
        missing = [f for f in fields if getattr(data, f) in (None, [], {})]
        if missing:
            raise ValueError(
                f"{self.__class__.__name__} expected {', '.join(missing)} from an earlier stage"
            )

    @abstractmethod
    def validate_input_data(self, data: Data):
        """
        Validate the input data.

        Args:
            data (Data): The data to be validated.
        """
        pass

    @abstractmethod
    def extract_input(self, data: Data):
        """
        Extract input arguments from the Data object.

        Args:
            data (Data): The data object to extract input from.

        Returns:
            The extracted input arguments.
        """
        pass

    @abstractmethod
    def run(self, *args):
        """
        Run the stage's main logic.

        Args:
            *args: The input arguments for the stage.

        Returns:
            The result of the stage's logic.
        """
        pass

    @abstractmethod
    def update_data(self, data: Data, result):
        """
        Update the data object with the result.

        Args:
            data (Data): The data object to be updated.
            result: The result to update the data with.
        """
        pass
