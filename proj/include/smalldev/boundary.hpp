#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "smalldev/error.hpp"

namespace smalldev {

/// The band half-width sequence f_N.
class Boundary {
 public:
  enum class Family { constant, power, table };

  static Boundary constant(double f) {
    if (!(f > 0.0) || !std::isfinite(f)) throw DomainError("boundary: constant must be positive and finite");
    Boundary b;
    b.family_ = Family::constant;
    b.c_ = f;
    return b;
  }

  /// f_N = c N^gamma.
  static Boundary power(double c, double gamma) {
    if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(gamma))
      throw DomainError("boundary: power family needs c > 0 and finite gamma");
    Boundary b;
    b.family_ = Family::power;
    b.c_ = c;
    b.gamma_ = gamma;
    return b;
  }

  /// f_N = values[N-1].
  static Boundary table(std::vector<double> values) {
    if (values.empty()) throw DomainError("boundary: empty table");
    for (double v : values)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("boundary: table entries must be positive");
    Boundary b;
    b.family_ = Family::table;
    b.table_ = std::move(values);
    return b;
  }

  double operator()(std::size_t N) const {
    if (N == 0) throw DomainError("boundary: N must be positive");
    switch (family_) {
      case Family::constant:
        return c_;
      case Family::power:
        return c_ * std::pow(static_cast<double>(N), gamma_);
      case Family::table:
        if (N > table_.size()) {
          std::ostringstream os;
          os << "boundary: table has " << table_.size() << " entries, N=" << N << " requested";
          throw DomainError(os.str());
        }
        return table_[N - 1];
    }
    return c_;
  }

  Family family() const { return family_; }
  double scale() const { return c_; }
  double exponent() const { return gamma_; }
  const std::vector<double>& values() const { return table_; }

  std::string describe() const {
    std::ostringstream os;
    switch (family_) {
      case Family::constant:
        os << "f=" << c_;
        break;
      case Family::power:
        os << "f_N=" << c_ << "*N^" << gamma_;
        break;
      case Family::table:
        os << "table[" << table_.size() << "]";
        break;
    }
    return os.str();
  }

 private:
  Boundary() = default;
  Family family_ = Family::constant;
  double c_ = 1.0;
  double gamma_ = 0.0;
  std::vector<double> table_;
};

}  // namespace smalldev
