#pragma once
#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace elld {

using bigint = boost::multiprecision::cpp_int;
using bigrat = boost::multiprecision::cpp_rational;

// canonical "num/den" form used by the CLI report contract, e.g. "-216/25";
// integers render as "n/1" so the format is uniform
inline std::string rat_string(const bigrat& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

inline double rat_double(const bigrat& r) { return r.template convert_to<double>(); }

}  // namespace elld
