#pragma once

#include "tetra/groundstate.hpp"

namespace fixture {

inline const tetra::RadialProfile &profile_p3() {
  static const tetra::RadialProfile prof = tetra::shoot_ground_state(3.0, 3, 1e-8);
  return prof;
}

}  // namespace fixture
