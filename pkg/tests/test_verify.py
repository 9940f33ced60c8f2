from yuleperc import verify


def names(checks):
    return [c.name for c in checks]


def test_scenarios_registered():
    assert set(verify.SCENARIOS) == {
        "bounded", "critical", "intermediate", "ancestral", "tau", "lecam", "oracle-equivalence",
    }


def test_lecam_passes():
    assert all(c.passed for c in verify.lecam(trials=30))


def test_small_runs_produce_checks():
    # shapes only; the full-size runs live in the acceptance suite
    assert len(verify.bounded(n=10**4, reps=20)) == 3
    assert len(verify.critical(n=10**4, reps=20)) == 3
    assert len(verify.intermediate(n=10**4, reps=20)) == 3
    assert len(verify.tau(n=100, reps=200)) == 1
    checks = verify.oracle_equivalence(n=10, p=0.3, x=2, reps=200)
    assert len(checks) == 4
    assert all(c.passed for c in checks[:2])


def test_gumbel_identity_check_is_exact():
    checks = verify.critical(n=10**4, reps=10)
    identity = [c for c in checks if c.name.startswith("Gumbel")][0]
    assert identity.passed


def test_check_to_dict():
    c = verify.lecam(trials=3)[0]
    d = c.to_dict()
    assert set(d) == {"name", "passed", "value", "bound", "detail"}
