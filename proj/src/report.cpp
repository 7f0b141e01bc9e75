#include "robias/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robias/error.hpp"

namespace robias {

using nlohmann::json;

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

json report_to_json(const ExperimentReport& rep) {
  json j;
  j["name"] = rep.name;
  j["master_seed"] = rep.master_seed;
  j["repeats"] = rep.repeats;
  j["class_names"] = rep.class_names;
  j["corr_threshold"] = rep.corr_threshold;
  j["corr_warning"] = rep.corr_warning;
  j["original_canonical"] = rep.original_canonical ? json(*rep.original_canonical) : json(nullptr);
  json summaries = json::array();
  for (const auto& s : rep.summaries) {
    summaries.push_back({{"approach", to_string(s.approach)},
                         {"values", s.values},
                         {"mean", s.mean},
                         {"std", s.std},
                         {"min", s.min},
                         {"max", s.max},
                         {"infeasible", s.infeasible},
                         {"failed", s.failed},
                         {"accuracy_flags", s.accuracy_flags}});
  }
  j["summaries"] = std::move(summaries);
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json jr{{"approach", to_string(r.approach)},
            {"repeat", r.repeat},
            {"status", to_string(r.status)},
            {"note", r.note},
            {"b_r", r.b_r},
            {"delta_x_max", r.delta_x_max},
            {"ratios", r.ratios},
            {"train_accuracy", r.train_accuracy},
            {"test_accuracy", r.test_accuracy},
            {"accuracy_ok", r.accuracy_ok},
            {"reseeds", r.reseeds},
            {"train_rows", r.train_rows},
            {"synthetic_rows", r.synthetic_rows},
            {"epochs", r.epochs},
            {"seed", r.seed}};
    if (r.validation) jr["validation"] = validation_to_json(*r.validation);
    runs.push_back(std::move(jr));
  }
  j["runs"] = std::move(runs);
  return j;
}

std::string report_csv(const ExperimentReport& rep) {
  std::ostringstream os;
  os << "approach,count,mean,std,min,max,infeasible,failed,accuracy_flags\n";
  for (const auto& s : rep.summaries) {
    os << to_string(s.approach) << ',' << s.values.size() << ',' << num(s.mean) << ','
       << num(s.std) << ',' << num(s.min) << ',' << num(s.max) << ',' << s.infeasible << ','
       << s.failed << ',' << s.accuracy_flags << '\n';
  }
  return os.str();
}

std::string runs_csv(const ExperimentReport& rep) {
  std::ostringstream os;
  os << "approach,repeat,status,b_r,delta_x_max,train_accuracy,test_accuracy,accuracy_ok,reseeds,"
        "train_rows,synthetic_rows,epochs,seed,note\n";
  for (const auto& r : rep.runs) {
    os << to_string(r.approach) << ',' << r.repeat << ',' << to_string(r.status) << ','
       << num(r.b_r) << ',' << num(r.delta_x_max) << ',' << num(r.train_accuracy) << ','
       << num(r.test_accuracy) << ',' << (r.accuracy_ok ? 1 : 0) << ',' << r.reseeds << ','
       << r.train_rows << ',' << r.synthetic_rows << ',' << r.epochs << ',' << r.seed << ','
       << csv_field(r.note) << '\n';
  }
  return os.str();
}

std::string boxplot_svg(const ExperimentReport& rep) {
  constexpr double kWidth = 110.0;
  constexpr double kTop = 30.0;
  constexpr double kHeight = 300.0;
  constexpr double kLeft = 60.0;
  double top = 0.0;
  for (const auto& s : rep.summaries) {
    if (!s.values.empty()) top = std::max(top, s.max);
  }
  top = top > 0.0 ? top * 1.1 : 1.0;
  auto y = [&](double v) { return kTop + kHeight * (1.0 - v / top); };

  const double width = kLeft + kWidth * static_cast<double>(rep.summaries.size()) + 20.0;
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << kTop + kHeight + 50.0 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<text x=\"" << kLeft << "\" y=\"18\">B_R per approach (" << xml_escape(rep.name)
     << ", " << rep.repeats << " repeats)</text>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kTop + kHeight << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = top * t / 4.0;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">"
       << std::setprecision(3) << v << std::setprecision(2) << "</text>\n";
  }
  for (std::size_t i = 0; i < rep.summaries.size(); ++i) {
    const auto& s = rep.summaries[i];
    const double cx = kLeft + kWidth * (static_cast<double>(i) + 0.5);
    os << "<g class=\"approach\" data-approach=\"" << to_string(s.approach) << "\">\n";
    if (s.values.empty()) {
      os << "  <text x=\"" << cx << "\" y=\"" << kTop + kHeight / 2
         << "\" text-anchor=\"middle\">" << (s.infeasible > 0 ? "infeasible" : "no data")
         << "</text>\n";
    } else {
      const double q1 = quantile(s.values, 0.25);
      const double med = quantile(s.values, 0.5);
      const double q3 = quantile(s.values, 0.75);
      os << "  <line x1=\"" << cx << "\" y1=\"" << y(s.min) << "\" x2=\"" << cx << "\" y2=\""
         << y(s.max) << "\" stroke=\"black\"/>\n";
      os << "  <rect x=\"" << cx - 25 << "\" y=\"" << y(q3) << "\" width=\"50\" height=\""
         << std::max(y(q1) - y(q3), 0.5) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
      os << "  <line x1=\"" << cx - 25 << "\" y1=\"" << y(med) << "\" x2=\"" << cx + 25
         << "\" y2=\"" << y(med) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      if (s.infeasible > 0) {
        os << "  <text x=\"" << cx << "\" y=\"" << kTop + 12
           << "\" text-anchor=\"middle\" fill=\"gray\">" << s.infeasible << " infeasible</text>\n";
      }
    }
    os << "  <text x=\"" << cx << "\" y=\"" << kTop + kHeight + 18
       << "\" text-anchor=\"middle\">" << to_string(s.approach) << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_report(const ExperimentReport& rep, const std::filesystem::path& dir, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  write_file(dir / "report.csv", report_csv(rep));
  write_file(dir / "runs.csv", runs_csv(rep));
  write_file(dir / "report.json", report_to_json(rep).dump(2) + "\n");
  json timing{{"repeat_seconds", rep.repeat_seconds}};
  write_file(dir / "timing.json", timing.dump(2) + "\n");
  if (svg) write_file(dir / "boxplot.svg", boxplot_svg(rep));
}

}  // namespace robias
