"""Calendar-anchored grid arithmetic."""

import pytest

from facsim.timegrid import SECONDS_PER_DAY, TimeGrid


class TestTimeGrid:
    def test_step_counts(self):
        grid = TimeGrid.from_iso("2026-01-05", days=2, timestep_s=60.0)
        assert grid.n_steps == 2880
        assert grid.steps_per_day == 1440
        assert grid.horizon_s == 2 * SECONDS_PER_DAY

    def test_timestep_must_divide_day(self):
        with pytest.raises(ValueError):
            TimeGrid.from_iso("2026-01-05", days=1, timestep_s=7.0)

    def test_positive_horizon(self):
        with pytest.raises(ValueError):
            TimeGrid.from_iso("2026-01-05", days=0, timestep_s=60.0)

    def test_day_of_week_starts_monday(self):
        grid = TimeGrid.from_iso("2026-01-05", days=9, timestep_s=3600.0)
        assert grid.day_of_week.tolist() == [0, 1, 2, 3, 4, 5, 6, 0, 1]

    def test_month_rollover(self):
        grid = TimeGrid.from_iso("2026-01-31", days=2, timestep_s=3600.0)
        assert grid.month_of_day.tolist() == [0, 1]  # Jan then Feb

    def test_hour_of_step(self):
        grid = TimeGrid.from_iso("2026-01-05", days=1, timestep_s=1800.0)
        assert grid.hour_of_step[:4].tolist() == [0, 0, 1, 1]
        assert grid.hour_of_step[-1] == 23

    def test_day_of_step(self):
        grid = TimeGrid.from_iso("2026-01-05", days=2, timestep_s=21600.0)
        assert grid.day_of_step.tolist() == [0, 0, 0, 0, 1, 1, 1, 1]

    def test_iso_timestamps(self):
        grid = TimeGrid.from_iso("2026-01-05", days=1, timestep_s=21600.0)
        stamps = [str(t) for t in grid.iso_timestamps()]
        assert stamps[0] == "2026-01-05T00:00:00"
        assert stamps[-1] == "2026-01-05T18:00:00"
        assert len(stamps) == grid.n_steps

    def test_day_start(self):
        grid = TimeGrid.from_iso("2026-01-05", days=3, timestep_s=3600.0)
        assert grid.day_start_s(2) == 2 * SECONDS_PER_DAY
