from functools import wraps
from types import GeneratorType
from typing import Any, Callable, Generator, Sequence

import numpy as np

from .exceptions import NonFiniteState

__all__ = (
    'handle_and_convert_numerical_errors',
    'chunk_by_length',
)


def chunk_by_length(items: Sequence, step: int) -> Generator:
    """Yield successive step-sized chunks from items."""
    for i in range(0, len(items), step):
        yield items[i : i + step]


def handle_and_convert_numerical_errors(func: Callable) -> Any:
    """decorator for run numerical code with floating point traps and raise NonFiniteState

    Args:
        func (Callable): numerical routine

    Returns:
        Any: result of func
    """

    def generator_wrapper(generator):
        while True:
            with np.errstate(over='raise', invalid='raise', divide='raise'):
                try:
                    item = next(generator)
                except StopIteration:
                    return
                except (FloatingPointError, ZeroDivisionError, OverflowError) as e:
                    raise NonFiniteState(str(e))
            yield item

    @wraps(func)
    def main_wrapper(*args, **kwargs):
        with np.errstate(over='raise', invalid='raise', divide='raise'):
            try:
                result = func(*args, **kwargs)
            except (FloatingPointError, ZeroDivisionError, OverflowError) as e:
                raise NonFiniteState(str(e))
        if isinstance(result, GeneratorType):
            result = generator_wrapper(result)
        return result

    return main_wrapper
