#pragma once

#include <iosfwd>

#include "opo/gaussian_core.hpp"

namespace opo {

// CSV layout: "# analysis_frequency_hz=<value>" metadata line, header row
// "p0,q0,p1,q1,p2,q2", then six data rows. Undetermined entries are "nan".
void write_covariance_csv(std::ostream& out, const SpectralCovariance& s);
SpectralCovariance read_covariance_csv(std::istream& in);

}  // namespace opo
