#include "mfg/io.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "mfg/errors.hpp"

namespace mfg {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(&out), columns_(header.size()) {
  if (header.empty()) throw InvalidArgument("CSV header is empty");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c > 0) *out_ << ',';
    *out_ << header[c];
  }
  *out_ << '\n';
}

void CsvWriter::sep() {
  if (filled_ >= columns_) throw InvalidArgument("CSV row has more cells than the header");
  if (filled_ > 0) *out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  *out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::int64_t v) {
  sep();
  *out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(std::uint64_t v) {
  sep();
  *out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  sep();
  *out_ << v;
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw InvalidArgument("CSV row has fewer cells than the header");
  *out_ << '\n';
  filled_ = 0;
}

std::vector<std::string> numbered(std::string_view prefix, int count) {
  std::vector<std::string> names;
  for (int c = 1; c <= count; ++c) names.push_back(std::string(prefix) + std::to_string(c));
  return names;
}

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu) {
  CsvWriter w(out, concat({"weight"}, numbered("x", mu.dim())));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    w.cell(mu.weight(i));
    for (double x : mu.atom(i)) w.cell(x);
    w.end_row();
  }
}

void write_flow_csv(std::ostream& out, const MeasureFlow& flow) {
  CsvWriter w(out, concat({"j", "t", "weight"}, numbered("x", flow.dim())));
  for (std::size_t j = 0; j < flow.size(); ++j) {
    const auto& mu = flow.at(j);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      w.cell(static_cast<std::uint64_t>(j)).cell(flow.times()[j]).cell(mu.weight(i));
      for (double x : mu.atom(i)) w.cell(x);
      w.end_row();
    }
  }
}

void write_step_control_csv(std::ostream& out, const StepControl& u) {
  CsvWriter w(out, concat({"slot", "t"}, numbered("gamma", u.dim())));
  for (int j = 0; j < u.grid().slots(); ++j) {
    w.cell(j).cell(u.grid().time(j));
    for (double g : u.value(j)) w.cell(g);
    w.end_row();
  }
}

void write_player_path_csv(std::ostream& out, const PathBundle& bundle, std::size_t player) {
  if (player >= bundle.players) throw InvalidArgument("player index out of range");
  CsvWriter w(out, concat(concat(concat({"t"}, numbered("x", bundle.d)), numbered("gamma", bundle.d2)),
                          numbered("w", bundle.d1)));
  const NoisePath noise = bundle.noise(player);
  const int J = bundle.grid.slots();
  for (int j = 0; j <= J; ++j) {
    w.cell(bundle.grid.time(j));
    for (double x : bundle.state(j, player)) w.cell(x);
    for (int c = 0; c < bundle.d2; ++c) {
      if (j < J) {
        w.cell(bundle.control(j, player)[static_cast<std::size_t>(c)]);
      } else {
        w.cell(std::string_view{});
      }
    }
    for (double x : noise.at(j)) w.cell(x);
    w.end_row();
  }
}

void write_value_csv(std::ostream& out, const DpResult& dp) {
  const int d = dp.sgrid.dim();
  CsvWriter w(out, concat(concat({"j", "t", "node"}, numbered("x", d)), {"value"}));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int j = 0; j < dp.value.slices; ++j) {
    const auto slice = dp.value.slice(j);
    for (std::size_t n = 0; n < dp.value.nodes; ++n) {
      dp.sgrid.node(n, x);
      w.cell(j).cell(dp.decision_grid.time(j)).cell(static_cast<std::uint64_t>(n));
      for (double v : x) w.cell(v);
      w.cell(slice[n]).end_row();
    }
  }
}

void write_policy_csv(std::ostream& out, const DpResult& dp) {
  const int d = dp.sgrid.dim();
  CsvWriter w(out, concat(concat(concat({"j", "t", "node"}, numbered("x", d)), {"atom"}),
                          numbered("gamma", dp.cgrid.dim)));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int j = 0; j < dp.policy.slots; ++j) {
    for (std::size_t n = 0; n < dp.policy.nodes; ++n) {
      dp.sgrid.node(n, x);
      const std::uint32_t a = dp.policy.at(j, n);
      w.cell(j).cell(dp.decision_grid.time(j)).cell(static_cast<std::uint64_t>(n));
      for (double v : x) w.cell(v);
      w.cell(static_cast<std::uint64_t>(a));
      for (double g : dp.cgrid.atom(a)) w.cell(g);
      w.end_row();
    }
  }
}

void write_oracle_csv(std::ostream& out, const LqOracle& oracle, const TimeGrid& grid) {
  CsvWriter w(out, {"t", "P", "gain", "offset", "mean", "variance"});
  for (int j = 0; j <= grid.slots(); ++j) {
    const double t = grid.time(j);
    w.cell(t)
        .cell(oracle.P_at(t))
        .cell(oracle.gain_at(t))
        .cell(oracle.offset_at(t))
        .cell(oracle.mean_at(t))
        .cell(oracle.variance_at(t))
        .end_row();
  }
}

}  // namespace mfg
