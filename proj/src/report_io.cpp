#include "entlab/report_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "entlab/error.hpp"

namespace entlab {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string param_field(const nlohmann::ordered_json& params, const char* key) {
  if (!params.contains(key)) return "";
  const auto& v = params.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return csv_field(v.get<std::string>());
  return csv_field(v.dump());
}

struct Frame {
  double left = 70, right = 170, top = 40, bottom = 60;
  double width = 720, height = 440;
  double x_min = 0, x_max = 2, y_min = -6, y_max = 1;  // y in log10 units

  [[nodiscard]] double px(double x) const { return left + (x - x_min) / (x_max - x_min) * (width - left - right); }
  [[nodiscard]] double py(double log_y) const {
    return top + (y_max - log_y) / (y_max - y_min) * (height - top - bottom);
  }
};

std::string polyline(const Frame& f, const std::vector<double>& xs, const std::vector<double>& ys, double floor,
                     const char* colour, const char* dash) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\"";
  if (dash[0] != '\0') out << " stroke-dasharray=\"" << dash << "\"";
  out << " points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double y = std::clamp(std::log10(std::max(ys[i], floor)), f.y_min, f.y_max);
    out << format_double(std::round(f.px(xs[i]) * 100) / 100) << ',' << format_double(std::round(f.py(y) * 100) / 100)
        << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

std::string to_jsonl(const std::vector<InequalityReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<InequalityReport> parse_jsonl(const std::string& text) {
  std::vector<InequalityReport> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(report_from_json(nlohmann::ordered_json::parse(line)));
  }
  return out;
}

std::string to_csv(const std::vector<InequalityReport>& reports) {
  std::string out = "name,n,lhs,rhs,margin,slack,satisfied,seed\n";
  for (const auto& r : reports) {
    out += csv_field(r.name) + ',' + param_field(r.params, "n") + ',' + format_double(r.lhs) + ',' +
           format_double(r.rhs) + ',' + format_double(r.margin) + ',' + format_double(r.slack) + ',' +
           (r.satisfied ? "true" : "false") + ',' + param_field(r.params, "seed") + '\n';
  }
  return out;
}

std::string profile_svg(const ConcentrationProfile& p) {
  Frame f;
  const double floor = 0.5 / static_cast<double>(std::max<std::size_t>(p.m, 1));
  f.y_min = std::floor(std::log10(floor));
  if (!p.eps_grid.empty()) {
    f.x_min = *std::min_element(p.eps_grid.begin(), p.eps_grid.end());
    f.x_max = *std::max_element(p.eps_grid.begin(), p.eps_grid.end());
    if (f.x_max <= f.x_min) f.x_max = f.x_min + 1.0;
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << f.left << "\" y=\"22\" font-size=\"14\">" << p.model << ", n = " << p.n << ", m = " << p.m
      << "</text>\n";

  const double x0 = f.px(f.x_min), x1 = f.px(f.x_max), y0 = f.py(f.y_min), y1 = f.py(f.y_max);
  out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(f.y_min); d <= static_cast<int>(f.y_max); ++d) {
    const double y = f.py(d);
    out << "<line x1=\"" << x0 << "\" y1=\"" << y << "\" x2=\"" << x1 << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << x0 - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  for (double e : p.eps_grid) {
    out << "<text x=\"" << f.px(e) << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">" << format_double(e)
        << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y0 + 40 << "\" text-anchor=\"middle\">eps</text>\n";
  out << "<text x=\"18\" y=\"" << (y0 + y1) / 2 << "\" transform=\"rotate(-90 18 " << (y0 + y1) / 2
      << ")\" text-anchor=\"middle\">P{|h~/n - h/n| &gt;= eps}</text>\n";

  struct Curve {
    const std::vector<double>* ys;
    const char* label;
    const char* colour;
    const char* dash;
  };
  std::vector<Curve> curves{{&p.empirical_tail, "empirical tail", "#1f77b4", ""},
                            {&p.tail_bound, "4 exp(-eps^2 n/16)", "#d62728", "6 4"}};
  if (p.oracle_tail) curves.push_back({&*p.oracle_tail, "chi-square oracle", "#2ca02c", "2 3"});
  double ly = y1 + 10;
  for (const auto& c : curves) {
    out << polyline(f, p.eps_grid, *c.ys, floor, c.colour, c.dash);
    out << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 36 << "\" y2=\"" << ly << "\" stroke=\""
        << c.colour << "\" stroke-width=\"2\"" << (c.dash[0] ? std::string(" stroke-dasharray=\"") + c.dash + "\"" : "")
        << "/>\n";
    out << "<text x=\"" << x1 + 42 << "\" y=\"" << ly + 4 << "\">" << c.label << "</text>\n";
    ly += 20;
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace entlab
