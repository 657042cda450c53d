#include "graphrqi/spectrum.hpp"

#include <cmath>

#include "file_util.hpp"
#include "graphrqi/errors.hpp"
#include "text_util.hpp"

namespace graphrqi {

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = -1;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // Entries equal to within rounding count as ties so the first one wins.
    if (std::abs(v[i]) > mag * (1.0 + 1e-12)) {
      mag = std::abs(v[i]);
      best = i;
    }
  }
  if (best >= 0 && v[best] < 0.0) v = -v;
}

Eigen::VectorXd residuals(const Eigen::MatrixXd& lap, const Eigen::MatrixXd& vectors,
                          const Eigen::VectorXd& values) {
  Eigen::VectorXd r(values.size());
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    r[j] = (lap * vectors.col(j) - values[j] * vectors.col(j)).norm();
  }
  return r;
}

std::string format_spectrum(const Spectrum& spec) {
  std::string out = std::to_string(spec.n()) + " " + std::to_string(spec.k()) + "\n";
  for (Eigen::Index j = 0; j < spec.k(); ++j) {
    if (j) out += ' ';
    out += detail::format_sig17(spec.values[j]);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < spec.n(); ++i) {
    for (Eigen::Index j = 0; j < spec.k(); ++j) {
      if (j) out += ' ';
      out += detail::format_sig17(spec.vectors(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_spectrum(const Spectrum& spec, const std::filesystem::path& path) {
  detail::write_file(path, format_spectrum(spec));
}

Spectrum parse_spectrum(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::vector<double> header;
  std::size_t last_line = 0;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t line) {
    last_line = line;
    const auto row = detail::trim(raw);
    if (row.empty()) return;
    std::vector<double> vals;
    for (const auto f : detail::split_ws(row)) {
      const auto v = detail::parse_number<double>(f);
      if (!v) throw ParseError("cannot parse value '" + std::string(f) + "'", line);
      vals.push_back(*v);
    }
    if (header.empty()) {
      if (vals.size() != 2) throw ParseError("expected 'n k'", line);
      header = vals;
      return;
    }
    rows.push_back(std::move(vals));
  });
  if (header.empty()) throw ParseError("empty spectrum dump", 0);
  const auto n = static_cast<Eigen::Index>(header[0]);
  const auto k = static_cast<Eigen::Index>(header[1]);
  if (static_cast<Eigen::Index>(rows.size()) != n + 1) {
    throw ParseError("expected " + std::to_string(n + 1) + " data rows", last_line);
  }
  Spectrum s;
  s.values.resize(k);
  s.vectors.resize(n, k);
  if (static_cast<Eigen::Index>(rows[0].size()) != k) throw ParseError("eigenvalue row length", 2);
  for (Eigen::Index j = 0; j < k; ++j) s.values[j] = rows[0][static_cast<std::size_t>(j)];
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i + 1)];
    if (static_cast<Eigen::Index>(r.size()) != k) {
      throw ParseError("eigenvector row length", static_cast<std::size_t>(i + 3));
    }
    for (Eigen::Index j = 0; j < k; ++j) s.vectors(i, j) = r[static_cast<std::size_t>(j)];
  }
  s.residuals = Eigen::VectorXd::Zero(k);
  return s;
}

}  // namespace graphrqi
