#pragma once

#include "oddkh/diagram.hpp"
#include "oddkh/ints.hpp"
#include "oddkh/laurent.hpp"

namespace oddkh {

// |det(Goeritz matrix)| from a checkerboard coloring: the order of H_1 of the
// double branched cover (0 encodes infinite)
Int goeritz_det(const Diagram& d);

// unnormalized Jones polynomial by the Kauffman-bracket state sum, in the
// q-convention of graded_euler (crossingless unknot -> q + q^{-1})
LaurentPoly kauffman_jones(const Diagram& d);

} // namespace oddkh
