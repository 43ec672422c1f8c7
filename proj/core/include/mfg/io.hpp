#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mfg/dynamics.hpp"
#include "mfg/measures.hpp"
#include "mfg/mfg_solver.hpp"
#include "mfg/models.hpp"
#include "mfg/relaxed_controls.hpp"

namespace mfg {

// Shortest round-trip decimal form (std::to_chars), so identical doubles
// always print identical bytes.
std::string format_number(double v);

// Comma-separated rows with a fixed header. Cells are appended left to right;
// end_row checks the column count.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(std::int64_t v);
  CsvWriter& cell(std::uint64_t v);
  CsvWriter& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  CsvWriter& cell(std::string_view v);
  void end_row();

 private:
  void sep();
  std::ostream* out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

// Column names x1..xd (prefix given).
std::vector<std::string> numbered(std::string_view prefix, int count);

// weight, x1..xd
void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu);
// j, t, weight, x1..xd
void write_flow_csv(std::ostream& out, const MeasureFlow& flow);
// slot, t, gamma1..gamma_d2
void write_step_control_csv(std::ostream& out, const StepControl& u);
// t, x1.., gamma1.., w1.. (controls and noise are blank at t = T)
void write_player_path_csv(std::ostream& out, const PathBundle& bundle, std::size_t player);
// j, t, node, x1..xd, value
void write_value_csv(std::ostream& out, const DpResult& dp);
// j, t, node, x1..xd, atom, gamma1..
void write_policy_csv(std::ostream& out, const DpResult& dp);
// t, P, gain, offset, mean, variance, at the points of grid
void write_oracle_csv(std::ostream& out, const LqOracle& oracle, const TimeGrid& grid);

}  // namespace mfg
