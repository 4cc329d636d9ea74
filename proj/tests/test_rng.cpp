#include <set>

#include "ckn/rng.hpp"
#include "doctest.h"

using namespace ckn;

TEST_CASE("derived seeds are deterministic") {
  CHECK(derive_seed(42, "eigen.lambda1") == derive_seed(42, "eigen.lambda1"));
  CHECK(make_rng(7, "mp")() == make_rng(7, "mp")());
}

TEST_CASE("streams are independent of each other") {
  std::set<std::uint64_t> seeds;
  for (const char* s : {"eigen.lambda1", "eigen.mu2", "mp", "link", "tail-samples", "checkf"})
    seeds.insert(derive_seed(42, s));
  CHECK(seeds.size() == 6);
}

TEST_CASE("changing the root seed changes every stream") {
  CHECK(derive_seed(1, "mp") != derive_seed(2, "mp"));
}
