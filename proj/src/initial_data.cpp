#include "dipole/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dipole {

namespace {

constexpr double kGaussWidth = 8.0;

std::size_t expected_params(const std::string& gen) {
  if (gen == "indicator" || gen == "hat" || gen == "gaussian_truncated") return 2;
  if (gen == "csv") return 0;
  return static_cast<std::size_t>(-1);
}

double discrete_mass(const Field& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u.grid.weight(i, 0.0) * u.values[i];
  return s;
}

void normalise(Field& u) {
  const double m = discrete_mass(u);
  if (!(m > 0.0)) throw std::invalid_argument("initial data has no mass on the grid (resolution too coarse?)");
  for (auto& v : u.values) v /= m;
}

}  // namespace

InitialDataSpec InitialDataSpec::parse(const std::string& text) {
  InitialDataSpec s;
  const auto colon = text.find(':');
  s.generator = text.substr(0, colon);
  s.params.clear();
  if (s.generator == "csv") {
    if (colon == std::string::npos) throw std::invalid_argument("csv initial data needs a path: csv:<path>");
    s.csv_path = text.substr(colon + 1);
    return s;
  }
  if (colon != std::string::npos) {
    std::istringstream in(text.substr(colon + 1));
    std::string tok;
    while (std::getline(in, tok, ':')) {
      try {
        s.params.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("initial data parameter is not a number: " + tok);
      }
    }
  }
  const auto bad = s.violations();
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  return s;
}

InitialDataSpec InitialDataSpec::from_json(const json& j) {
  InitialDataSpec s;
  s.generator = j.at("generator").get<std::string>();
  s.params = j.value("params", std::vector<double>{});
  s.csv_path = j.value("path", std::string{});
  return s;
}

json InitialDataSpec::to_json() const {
  json j{{"generator", generator}, {"params", params}};
  if (!csv_path.empty()) j["path"] = csv_path;
  return j;
}

std::vector<std::string> InitialDataSpec::violations() const {
  std::vector<std::string> v;
  const std::size_t n = expected_params(generator);
  if (n == static_cast<std::size_t>(-1)) {
    v.push_back("unknown initial-data generator '" + generator + "'");
    return v;
  }
  if (generator == "csv") {
    if (csv_path.empty()) v.push_back("csv initial data needs a path");
    return v;
  }
  if (params.size() != n) {
    v.push_back(generator + " takes exactly two parameters");
    return v;
  }
  const double a = params[0], b = params[1];
  if (generator == "indicator") {
    if (a < 0.0) v.push_back("initial data must be supported in x >= 0 (indicator starts below 0)");
    if (!(b > a)) v.push_back("indicator[a, b] needs b > a");
  } else if (generator == "hat") {
    if (!(b > 0.0)) v.push_back("hat half-width must be positive");
    if (a - b < 0.0) v.push_back("initial data must be supported in x >= 0 (hat extends below 0)");
  } else {
    if (!(b > 0.0)) v.push_back("gaussian sigma must be positive");
    if (a - kGaussWidth * b < 0.0) v.push_back("initial data must be supported in x >= 0 (gaussian truncated at 8 sigma extends below 0)");
  }
  return v;
}

double InitialDataSpec::support_right() const {
  if (generator == "indicator") return params.at(1);
  if (generator == "hat") return params.at(0) + params.at(1);
  if (generator == "gaussian_truncated") return params.at(0) + kGaussWidth * params.at(1);
  const Field f = read_field_csv(csv_path);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.values[i] != 0.0) s = f.x(i);
  return s;
}

InitialData make_initial_data(const InitialDataSpec& spec, const Grid& g) {
  const auto bad = spec.violations();
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  InitialData out{Field(g), std::nullopt};
  Field& u = out.u0;
  const double h = g.h();

  if (spec.generator == "indicator") {
    const double a = spec.params[0], b = spec.params[1];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double lo = g.x(i) - 0.5 * h, hi = g.x(i) + 0.5 * h;
      const double overlap = std::max(0.0, std::min(hi, b) - std::max(lo, a));
      u.values[i] = overlap / h;
    }
    out.exact = ExactMoments{b - a, 0.5 * (b * b - a * a), (b * b * b - a * a * a) / 3.0};
  } else if (spec.generator == "hat") {
    const double c = spec.params[0], w = spec.params[1];
    for (std::size_t i = 0; i < g.size(); ++i) u.values[i] = std::max(0.0, 1.0 - std::abs(g.x(i) - c) / w) / w;
    normalise(u);
    out.exact = ExactMoments{1.0, c, c * c + w * w / 6.0};
  } else if (spec.generator == "gaussian_truncated") {
    const double c = spec.params[0], s = spec.params[1];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double z = (g.x(i) - c) / s;
      u.values[i] = std::abs(z) <= kGaussWidth ? std::exp(-0.5 * z * z) : 0.0;
    }
    normalise(u);
    out.exact = ExactMoments{1.0, c, c * c + s * s};
  } else {
    const CsvTable t = read_csv(spec.csv_path);
    if (t.columns.size() < 2 || t.columns[0].size() < 2) throw std::invalid_argument("csv initial data needs (x, value) rows");
    const auto& xs = t.columns[0];
    const auto& vs = t.columns[1];
    for (std::size_t r = 0; r < xs.size(); ++r) {
      if (r > 0 && !(xs[r] > xs[r - 1])) throw std::invalid_argument("csv initial data: x must be strictly increasing");
      if (vs[r] < 0.0) throw std::invalid_argument("initial data must be nonnegative (csv value < 0 at x = " + format_number(xs[r]) + ")");
      if (xs[r] < 0.0 && vs[r] != 0.0) throw std::invalid_argument("initial data must be supported in x >= 0 (csv)");
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      if (x < xs.front() || x > xs.back() || x < 0.0) continue;
      const auto it = std::upper_bound(xs.begin(), xs.end(), x);
      const std::size_t r = it == xs.end() ? xs.size() - 1 : static_cast<std::size_t>(it - xs.begin());
      const double x0 = xs[r - 1], x1 = xs[r];
      const double s = (x - x0) / (x1 - x0);
      u.values[i] = (1.0 - s) * vs[r - 1] + s * vs[r];
    }
  }
  zero_exterior(u);
  return out;
}

}  // namespace dipole
