#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "vortsphere/spectral_field.hpp"

namespace vortsphere {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text dump, one record per line:
///   # spharm-coeffs J=<J> norm=orthonormal phase=CS
///   j m re im
/// Values are printed with 17 significant digits so load(store(a)) == a bitwise.
void write_coeffs(std::ostream& os, const SpectralField& a);
SpectralField read_coeffs(std::istream& is);

void save_coeffs(const std::string& path, const SpectralField& a);
SpectralField load_coeffs(const std::string& path);

}  // namespace vortsphere
