#include "gdistill/report.hpp"

#include "gdistill/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace gdistill {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void finalize_accuracies(EvalReport& r) {
  r.accuracy_prod = r.accuracy_ind ? production_accuracy(*r.accuracy_ind, r.count_ind,
                                                         r.accuracy_tran, r.count_tran)
                                   : r.accuracy_tran;
}

void EvalReport::check() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error(std::string(name) + " outside [0, 1]");
  };
  unit(accuracy_tran, "accuracy_tran");
  unit(accuracy_prod, "accuracy_prod");
  unit(cut_value, "cut_value");
  if (accuracy_ind) {
    unit(*accuracy_ind, "accuracy_ind");
    const double lo = std::min(*accuracy_ind, accuracy_tran);
    const double hi = std::max(*accuracy_ind, accuracy_tran);
    if (accuracy_prod < lo || accuracy_prod > hi) {
      throw std::logic_error("accuracy_prod not between accuracy_ind and accuracy_tran");
    }
  }
}

nlohmann::json to_json(const LatencyStats& s) {
  return {{"mean", s.mean_us},   {"p50", s.p50_us},       {"p95", s.p95_us},
          {"repeats", s.repeats}, {"warmup", s.warmup},    {"unit", "microseconds"},
          {"checksum", s.checksum}};
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["accuracy_tran"] = r.accuracy_tran;
  j["accuracy_ind"] = r.accuracy_ind ? nlohmann::json(*r.accuracy_ind) : nlohmann::json(nullptr);
  j["accuracy_prod"] = r.accuracy_prod;
  j["count_tran"] = r.count_tran;
  j["count_ind"] = r.count_ind;
  j["cut_value"] = r.cut_value;
  j["latency"] = r.latency ? to_json(*r.latency) : nlohmann::json(nullptr);
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& p : r.noise_curve) {
    curve.push_back({{"alpha", p.alpha}, {"mean_acc", p.accuracy.mean}, {"std_acc", p.accuracy.std}});
  }
  j["noise_curve"] = curve;
  j["metadata"] = r.metadata;
  return j;
}

void write_noise_curve_csv(const std::filesystem::path& file, const std::vector<NoisePoint>& curve) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "alpha,mean_acc,std_acc\n";
  for (const auto& p : curve) out << fmt(p.alpha) << ',' << fmt(p.accuracy.mean) << ',' << fmt(p.accuracy.std) << '\n';
}

void write_report(const std::filesystem::path& dir, const EvalReport& r) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    out << to_json(r).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "report.csv");
    out << "metric,value\n";
    out << "accuracy_tran," << fmt(r.accuracy_tran) << '\n';
    if (r.accuracy_ind) out << "accuracy_ind," << fmt(*r.accuracy_ind) << '\n';
    out << "accuracy_prod," << fmt(r.accuracy_prod) << '\n';
    out << "cut_value," << fmt(r.cut_value) << '\n';
    if (r.latency) {
      out << "latency_mean_us," << fmt(r.latency->mean_us) << '\n';
      out << "latency_p50_us," << fmt(r.latency->p50_us) << '\n';
      out << "latency_p95_us," << fmt(r.latency->p95_us) << '\n';
    }
  }
  if (!r.noise_curve.empty()) write_noise_curve_csv(dir / "noise_curve.csv", r.noise_curve);
}

}  // namespace gdistill
