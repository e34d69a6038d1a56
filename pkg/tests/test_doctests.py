import doctest

import pytest

from mrcov import estimators, param_jump


@pytest.mark.parametrize("module", [estimators, param_jump], ids=lambda m: m.__name__)
def test_docstring_examples(module):
    failed, _ = doctest.testmod(module)
    assert failed == 0
