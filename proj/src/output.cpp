#include "ddlab/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ddlab/config.hpp"
#include "ddlab/error.hpp"

namespace ddlab {

namespace {

bool show_excess(ReportKind r) { return r != ReportKind::Total; }
bool show_total(ReportKind r) { return r != ReportKind::Excess; }

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::json opt_json(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_csv(const SweepConfig& cfg, const RiskCurve& curve) {
  std::string out = "# ddlab results v" + std::to_string(kResultsSchemaVersion) + "\n";
  out +=
      "sweep,axis,n,p,k,gamma,trials,emp_excess_mean,emp_excess_se,emp_total_mean,theory_excess,"
      "theory_total\n";
  const std::string kind = sweep_kind_name(curve.kind);
  const bool ex = show_excess(cfg.report), tot = show_total(cfg.report);
  for (const RiskPoint& pt : curve.points) {
    out += kind + ',' + std::to_string(pt.axis) + ',' + std::to_string(pt.n) + ',' +
           std::to_string(pt.p) + ',' + std::to_string(pt.k) + ',' + opt(pt.gamma) + ',' +
           std::to_string(pt.trials) + ',';
    out += (ex ? format_number(pt.emp_excess_mean) : "") + ',';
    out += format_number(pt.emp_excess_se) + ',';
    out += (tot ? format_number(pt.emp_total_mean) : "") + ',';
    out += (ex ? opt(pt.theory_excess) : "") + ',';
    out += (tot ? opt(pt.theory_total) : "") + '\n';
  }
  return out;
}

std::string format_json(const SweepConfig& cfg, const RiskCurve& curve) {
  nlohmann::json doc;
  doc["schema_version"] = kResultsSchemaVersion;
  doc["sweep"] = sweep_kind_name(curve.kind);
  doc["config"] = config_to_json(cfg);
  nlohmann::json points = nlohmann::json::array();
  const bool ex = show_excess(cfg.report), tot = show_total(cfg.report);
  for (const RiskPoint& pt : curve.points) {
    nlohmann::json j;
    j["axis"] = pt.axis;
    j["n"] = pt.n;
    j["p"] = pt.p;
    j["k"] = pt.k;
    j["gamma"] = opt_json(pt.gamma);
    j["trials"] = pt.trials;
    j["emp_excess_se"] = pt.emp_excess_se;
    if (ex) {
      j["emp_excess_mean"] = pt.emp_excess_mean;
      j["theory_excess"] = opt_json(pt.theory_excess);
    }
    if (tot) {
      j["emp_total_mean"] = pt.emp_total_mean;
      j["theory_total"] = opt_json(pt.theory_total);
    }
    points.push_back(std::move(j));
  }
  doc["points"] = std::move(points);
  return doc.dump(2) + "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace ddlab
