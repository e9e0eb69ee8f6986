#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace oddkh {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline Int abs_int(const Int& a) { return a < 0 ? Int(-a) : a; }

} // namespace oddkh
