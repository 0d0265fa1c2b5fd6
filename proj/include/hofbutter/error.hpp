#pragma once

#include <stdexcept>
#include <string>

namespace hofbutter {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised by Chern routines when the requested gap is closed.
struct GapClosed : Error {
  int j;
  GapClosed(int gap, const std::string& what) : Error(what), j(gap) {}
};

/// Two eigenvalues met (within tolerance) where a band was required to be isolated.
struct Degeneracy : Error {
  double k1, k2;
  Degeneracy(double a, double b, const std::string& what) : Error(what), k1(a), k2(b) {}
};

}  // namespace hofbutter
