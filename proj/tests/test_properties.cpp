#include <doctest.h>

#include "fleet_properties.hpp"

TEST_CASE("virtual battery properties on random fleets") {
  const auto failures = clcrc::test::check_fleet_properties(1000, 20170306);
  if (!failures.empty()) MESSAGE("fleet ", failures.front().fleet, ": ", failures.front().what);
  CHECK(failures.empty());
}
