#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "peakcast/alerts.hpp"
#include "peakcast/backtest.hpp"
#include "peakcast/ensemble.hpp"
#include "peakcast/sir.hpp"
#include "peakcast/timeseries.hpp"

namespace peakcast {

/// Shortest text that reads back to the same double.
std::string format_real(double x);

/// One forecast as a single-line JSON object. Absent values are null. The
/// calibration block and warnings are included when present.
std::string forecast_to_json(const DailyForecast& f);
/// Inverse of forecast_to_json for the forecast fields (calibration details
/// beyond t_sir/h_sir are not restored).
DailyForecast forecast_from_json(const std::string& line);

std::string alert_event_to_json(const std::string& facility, const AlertEvent& e);
std::string calibration_to_json(const CalibrationResult& c);

void write_forecasts_jsonl(std::ostream& out, std::span<const DailyForecast> forecasts);
std::vector<DailyForecast> read_forecasts_jsonl(std::istream& in);

/// Long format: date,field,value; one row per present field.
void write_forecasts_csv(std::ostream& out, std::span<const DailyForecast> forecasts);
std::vector<DailyForecast> read_forecasts_csv(std::istream& in);

/// Per-season metrics plus mean and std rows taken over seasons where each
/// metric is available; the n column counts them.
void write_report_csv(std::ostream& out, std::span<const SeasonReport> reports);
void write_anticipation_csv(std::ostream& out, std::span<const AnticipationRow> rows);
void write_anticipation_text(std::ostream& out, std::span<const AnticipationRow> rows);

/// One row per (lambda, monitoring day) with predicted date/magnitude and
/// their errors against the season truth.
void write_lambda_sweep_csv(std::ostream& out, std::span<const LambdaRun> runs);
void write_lambda_summary_csv(std::ostream& out, std::span<const LambdaRun> runs);

/// Ingestion schema: date,facility,age,count (age left empty).
void write_series_csv(std::ostream& out, const DailySeries& series);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_curve_csv(std::ostream& out, const SmoothedCurve& curve);

}  // namespace peakcast
