import threading

from grcsolve import OpCounters, counting
from grcsolve.counters import active_counters


def test_counting_nests_and_restores():
    outer, inner = OpCounters(), OpCounters()
    assert active_counters() is None
    with counting(outer):
        with counting(inner):
            assert active_counters() is inner
        assert active_counters() is outer
    assert active_counters() is None


def test_peak_vectors_is_a_maximum():
    c = OpCounters()
    c.note_vectors(3)
    c.note_vectors(7)
    c.note_vectors(2)
    assert c.peak_vectors == 7
    assert c.as_dict()["peak_vectors"] == 7
    d = c.copy()
    d.note_vectors(9)
    assert c.peak_vectors == 7


def test_counters_are_per_thread():
    seen = []

    def worker():
        seen.append(active_counters())

    with counting(OpCounters()):
        t = threading.Thread(target=worker)
        t.start()
        t.join()
    assert seen == [None]
