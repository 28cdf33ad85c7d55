import dataclasses

import pytest

from streamspan import (
    ConfigError,
    EstimatePmaxLedger,
    KnownPmaxLedger,
    RunReport,
    UnknownPmaxLedger,
    backend,
    make_ledger,
    run_stream,
)

from _support import identity_park, make_instance, quiet_params


def _masked(report):
    return {
        k: v
        for k, v in dataclasses.asdict(report).items()
        if not k.endswith("_seconds")
    }


class TestMakeLedger:
    def setup_method(self):
        self.params = quiet_params(2, 1, 1.0, 1.0)

    def test_each_regime_builds_its_ledger(self):
        assert isinstance(make_ledger(self.params, "pmax-given", pmax=4.0), KnownPmaxLedger)
        assert isinstance(
            make_ledger(self.params, "pmax-estimate", pmax_estimate=8.0, alpha=2.0),
            EstimatePmaxLedger,
        )
        assert isinstance(make_ledger(self.params, "pmax-unknown"), UnknownPmaxLedger)

    def test_missing_pmax_names_the_flag(self):
        with pytest.raises(ConfigError, match="--pmax"):
            make_ledger(self.params, "pmax-given")

    def test_missing_estimate_names_the_flag(self):
        with pytest.raises(ConfigError, match="--pmax-estimate"):
            make_ledger(self.params, "pmax-estimate")

    def test_unknown_regime_lists_the_choices(self):
        with pytest.raises(ConfigError, match="pmax-given, pmax-estimate, pmax-unknown"):
            make_ledger(self.params, "bogus")


class TestRunStream:
    def _instance(self, seed=11):
        park, jobs = make_instance(seed, 2, 1, 0.5, 6)
        params = quiet_params(2, 1, 0.5, 0.5)
        return park, params, jobs

    def test_chunking_does_not_change_the_report(self):
        park, params, jobs = self._instance()
        reports = []
        for split in ([jobs], [jobs[:1], jobs[1:]], [[j] for j in jobs]):
            ledger = KnownPmaxLedger(params, max(jobs))
            report, _ = run_stream(park, params, ledger, split)
            reports.append(_masked(report))
        assert reports[0] == reports[1] == reports[2]

    def test_artifacts_describe_the_pass(self):
        park, params, jobs = self._instance()
        ledger = KnownPmaxLedger(params, max(jobs))
        report, art = run_stream(park, params, ledger, [jobs])
        assert art.job_count == len(jobs)
        assert art.max_seen == max(jobs)
        assert len(art.large_ids) == report.search_jobs
        assert art.outcome.value == report.value

    def test_empty_stream_reports_zero(self):
        park, params, _ = self._instance()
        ledger = UnknownPmaxLedger(params)
        report, art = run_stream(park, params, ledger, [], regime="pmax-unknown")
        assert report.value == 0.0
        assert report.selected_t == 0.0
        assert report.job_count == 0
        assert report.search_jobs == 0
        assert report.mean_ingest_seconds == 0.0
        assert art.large_ids == frozenset()

    def test_machine_count_mismatch_is_rejected(self):
        park, _, jobs = self._instance()
        wrong = quiet_params(3, 1, 0.5, 0.5)
        ledger = KnownPmaxLedger(wrong, max(jobs))
        with pytest.raises(ConfigError, match="3 machines, park has 2"):
            run_stream(park, wrong, ledger, [jobs])

    def test_report_names_the_backend(self):
        park, params, jobs = self._instance()
        ledger = KnownPmaxLedger(params, max(jobs))
        report, _ = run_stream(park, params, ledger, [jobs])
        assert report.backend == backend()

    def test_memory_peaks_within_bounds(self):
        park, params, jobs = self._instance()
        ledger = KnownPmaxLedger(params, max(jobs))
        report, _ = run_stream(park, params, ledger, [jobs])
        assert report.peak_retained_jobs <= report.retained_job_bound
        assert report.peak_group_records <= report.group_record_bound


class TestReportLines:
    def _report(self, **overrides):
        park, jobs = make_instance(11, 2, 1, 0.5, 6)
        params = quiet_params(2, 1, 0.5, 0.5)
        ledger = KnownPmaxLedger(params, max(jobs))
        report, _ = run_stream(park, params, ledger, [jobs])
        return dataclasses.replace(report, **overrides) if overrides else report

    def test_core_lines_only_by_default(self):
        lines = self._report().as_lines()
        keys = [ln.split(":", 1)[0] for ln in lines]
        assert keys == list(RunReport._CORE)

    def test_stats_appends_the_extras(self):
        lines = self._report().as_lines(stats=True)
        keys = [ln.split(":", 1)[0] for ln in lines]
        assert keys == list(RunReport._CORE) + list(RunReport._EXTRA)

    def test_schedule_fields_appear_when_set(self):
        report = self._report(makespan=3.5, schedule_path="out.csv")
        lines = report.as_lines()
        assert "makespan: 3.5" in lines
        assert "schedule_path: 'out.csv'" in lines

    def test_every_line_is_key_colon_value(self):
        for line in self._report().as_lines(stats=True):
            key, _, value = line.partition(": ")
            assert key.isidentifier()
            assert value


def test_regimes_agree_on_one_instance():
    park, jobs = make_instance(29, 3, 2, 0.5, 8)
    params = quiet_params(3, 2, 0.5, 0.5)
    values = []
    for regime, kwargs in [
        ("pmax-given", {"pmax": max(jobs)}),
        ("pmax-estimate", {"pmax_estimate": 4 * max(jobs), "alpha": 4.0}),
        ("pmax-unknown", {}),
    ]:
        ledger = make_ledger(params, regime, **kwargs)
        report, _ = run_stream(park, params, ledger, [jobs], regime=regime)
        values.append(report.value)
    assert values[0] == values[1] == values[2]
