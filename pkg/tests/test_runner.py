import threading

from resonance_py.runner import run_batch


def test_results_follow_item_order() -> None:
    result = run_batch(lambda x: x * x, [3, 1, 2], max_concurrent=3)

    assert [r['value'] for r in result.results] == [9, 1, 4]
    assert (result.total, result.successful, result.failed) == (3, 3, 0)
    assert result.failures == []


def test_failed_unit_is_reported() -> None:
    def work(x):
        if x == 2:
            raise ValueError('singular')
        return x

    result = run_batch(work, [1, 2, 3], max_concurrent=2)

    assert result.failed == 1
    assert result.failures[0]['item'] == 2
    assert result.failures[0]['error'] == 'singular'
    assert isinstance(result.failures[0]['exception'], ValueError)


def test_progress_callback_sees_every_unit() -> None:
    seen = []

    run_batch(lambda x: x, range(5), max_concurrent=2,
              on_progress=lambda p: seen.append(p.completed))

    assert sorted(seen) == [1, 2, 3, 4, 5]


def test_stop_event_skips_pending_units() -> None:
    stop = threading.Event()
    stop.set()

    result = run_batch(lambda x: x, [1, 2], stop_event=stop)

    assert result.successful == 0
    assert all(r.get('skipped') for r in result.results)
