"""Single home for styling; no other module hardcodes a style value."""

FIGSIZE_PER_PANEL = (4.4, 3.0)
DPI = 150
PANEL_COLUMNS = 2

MEDIAN_COLOR = "#1f6fb4"
MEDIAN_LINEWIDTH = 1.8
BAND_OUTER_COLOR = "#9ec6e8"  # p10-p90
BAND_OUTER_ALPHA = 0.40
BAND_INNER_COLOR = "#5b9bd5"  # p25-p75
BAND_INNER_ALPHA = 0.45

GRID_COLOR = "#d8d8d8"
GRID_LINEWIDTH = 0.6
TITLE_FONTSIZE = 10
LABEL_FONTSIZE = 9
TICK_FONTSIZE = 8
LEGEND_FONTSIZE = 8

POWER_AXIS_LABEL = "facility power (MW)"
DAILY_X_LABEL = "hour of day"
WEEKLY_X_LABEL = "day of week"
PANEL_TITLE_FORMAT = "target utilization {target}%"
DAY_TICK_LABELS = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]
DAILY_TICK_STEP_H = 3

# y values stay in the emitted kW; only the tick labels rescale
KW_PER_MW = 1000.0
