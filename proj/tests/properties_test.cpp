#include "properties.hpp"

#include <doctest.h>

using namespace mchp::testing;

TEST_CASE("random markets keep the duality and pricing properties") {
  PropertyRun run;
  run.seed = 7;
  run.markets = 60;
  run.convex_markets = 15;
  auto t = run_properties(run);
  INFO(summary(t));
  CHECK(t.ok());
  for (auto& [name, c] : t.counts) CHECK(c.second > 0);
}
