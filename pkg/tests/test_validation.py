from resonance_py import validation
from resonance_py.config import RunConfig
from resonance_py.flow import ResonanceRecord, TrajectorySet


def _flow_with(records_for):
    def fake_flow(spec, n, delta, schedule, grid, **kwargs):
        records = records_for(spec)
        counts = [
            {'resonance': i, 'epsilon': schedule[-1], 'radius': r.radius,
             'count': r.multiplicity, 'multiplicity': r.multiplicity}
            for i, r in enumerate(records)
        ]
        return TrajectorySet(list(schedule), [], [], records, counts=counts)
    return fake_flow


def _record() -> ResonanceRecord:
    return ResonanceRecord(z=0.22 - 0.004j, multiplicity=1, band=1, delta=0.2,
                           residual=1e-12, radius=0.002)


def test_viscosity_limit_fails_without_well_resonances(monkeypatch) -> None:
    monkeypatch.setattr(validation, 'flow', _flow_with(lambda spec: []))

    result = validation.check_viscosity_limit(RunConfig.from_mapping({}))

    assert not result.passed
    assert result.detail['well']['vacuous'] and result.detail['sinc']['vacuous']


def test_viscosity_limit_marks_vacuous_sinc(monkeypatch) -> None:
    well = validation.reference_well()

    def records_for(spec):
        return [_record()] if spec == well else []

    monkeypatch.setattr(validation, 'flow', _flow_with(records_for))

    result = validation.check_viscosity_limit(RunConfig.from_mapping({}))

    assert result.passed
    assert result.detail['well'] == {
        'resonances': 1, 'matches': 0, 'violations': 0, 'count_mismatches': [], 'vacuous': False,
    }
    assert result.detail['sinc']['vacuous']
