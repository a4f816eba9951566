import json
import math
from pathlib import Path

import numpy as np

from resonance_py import export


def test_format_value_keeps_full_precision() -> None:
    assert export.format_value(0.1) == '1.0000000000000001e-01'
    assert export.format_value(np.float64(2.0)) == '2.0000000000000000e+00'
    assert export.format_value(7) == '7'
    assert export.format_value(True) == 'true'
    assert export.format_value([1, 'csv']) == '1,csv'


def test_jsonable_handles_complex_and_infinity() -> None:
    value = export.jsonable({'z': 0.25 - 0.5j, 'K': math.inf, 'v': np.arange(2)})
    assert value == {'z': [0.25, -0.5], 'K': 'inf', 'v': [0, 1]}


def test_csv_carries_sorted_provenance(tmp_path: Path) -> None:
    path = export.write_csv(
        tmp_path / 'table.csv', ('re', 'im'), [(1.0, -0.5)], {'seed': 1234, 'band': 2},
    )
    lines = path.read_text(encoding='utf-8').splitlines()
    assert lines == [
        '# band = 2',
        '# seed = 1234',
        're,im',
        '1.0000000000000000e+00,-5.0000000000000000e-01',
    ]


def test_json_document_layout(tmp_path: Path) -> None:
    path = export.write_json(tmp_path / 'doc.json', {'values': [1j]}, {'delta': 0.2})
    document = json.loads(path.read_text(encoding='utf-8'))
    assert document == {'schema_version': 1, 'config': {'delta': 0.2}, 'values': [[0.0, 1.0]]}
