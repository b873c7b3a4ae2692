#include "vortsphere/coeff_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace vortsphere {

namespace {
constexpr const char* kHeaderPrefix = "# spharm-coeffs J=";
constexpr const char* kHeaderSuffix = " norm=orthonormal phase=CS";
}  // namespace

void write_coeffs(std::ostream& os, const SpectralField& a) {
  os << kHeaderPrefix << a.truncation() << kHeaderSuffix << '\n';
  char buf[96];
  for (std::size_t j = 0; j <= a.truncation(); ++j)
    for (int m = -static_cast<int>(j); m <= static_cast<int>(j); ++m) {
      const Complex c = a(j, m);
      std::snprintf(buf, sizeof buf, "%zu %d %.17g %.17g\n", j, m, c.real(), c.imag());
      os << buf;
    }
}

SpectralField read_coeffs(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError("coefficient dump: missing header");
  const std::string prefix = kHeaderPrefix;
  if (line.rfind(prefix, 0) != 0) throw FormatError("coefficient dump: bad header '" + line + "'");
  std::istringstream hs(line.substr(prefix.size()));
  long J = -1;
  std::string rest;
  hs >> J;
  std::getline(hs, rest);
  if (J < 0 || rest != kHeaderSuffix)
    throw FormatError("coefficient dump: header must read '" + prefix + "<J>" + kHeaderSuffix + "'");

  SpectralField a(static_cast<std::size_t>(J));
  std::vector<bool> seen(a.size(), false);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    long j = 0, m = 0;
    double re = 0.0, im = 0.0;
    if (!(ls >> j >> m >> re >> im))
      throw FormatError("coefficient dump: malformed record on line " + std::to_string(lineno));
    if (j < 0 || j > J || m < -j || m > j)
      throw FormatError("coefficient dump: index out of range on line " + std::to_string(lineno));
    const std::size_t n = SpectralField::index(static_cast<std::size_t>(j), static_cast<int>(m));
    a.coeffs()[n] = Complex(re, im);
    seen[n] = true;
  }
  for (bool s : seen)
    if (!s) throw FormatError("coefficient dump: missing records for J=" + std::to_string(J));
  return a;
}

void save_coeffs(const std::string& path, const SpectralField& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_coeffs(os, a);
}

SpectralField load_coeffs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read_coeffs(is);
}

}  // namespace vortsphere
