#include "cep/conformal.hpp"

#include <sstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace cep;

namespace {

CalibrationStore store_with_group(Level level, int event_class, int label,
                                  const std::vector<double>& values, LabelSpace space,
                                  std::optional<double> epsilon = std::nullopt) {
  CalibrationStore store(space, epsilon);
  int i = 0;
  for (double v : values) {
    store.add({level, event_class, label, v, "s" + std::to_string(i++)});
  }
  store.seal();
  return store;
}

}  // namespace

TEST_CASE("nonconformity is one minus the label mass") {
  CHECK(nonconformity(std::vector<double>{1.0, 0.0, 0.0}, 0) == 0.0);
  CHECK(nonconformity(std::vector<double>{0.25, 0.25, 0.25, 0.25}, 2) == 0.75);
  CHECK(nonconformity(std::vector<double>{0.7, 0.2, 0.1}, 1) == 0.8);

  CHECK_THROWS_AS(nonconformity(std::vector<double>{0.5, 0.5}, 2), std::invalid_argument);
  CHECK_THROWS_AS(nonconformity(std::vector<double>{0.5, 0.5}, -1), std::invalid_argument);
  CHECK_THROWS_WITH_AS(nonconformity(std::vector<double>{0.5, 0.6}, 0),
                       doctest::Contains("sums to 1.1"), std::invalid_argument);
  CHECK_THROWS_AS(nonconformity(std::vector<double>{-0.1, 1.1}, 0), std::invalid_argument);
}

TEST_CASE("p_value counts ties and clamps at the floor") {
  const LabelSpace space{3, 3, 2};

  SUBCASE("query below all calibration values") {
    auto store = store_with_group(Level::node, 0, 1, {0.9, 0.8, 0.7}, space);
    CHECK(store.p_value(Level::node, 0, 1, 0.5) == 1.0);
  }
  SUBCASE("query above all calibration values clamps to the floor") {
    auto store = store_with_group(Level::node, 0, 1, {0.1, 0.2}, space);
    CHECK(store.p_value(Level::node, 0, 1, 0.95) == store.floor_for(2));
    CHECK(store.floor_for(2) == 1.0 / 3.0);
  }
  SUBCASE("ties count in the numerator") {
    auto store = store_with_group(Level::node, 0, 1, {0.2, 0.5, 0.5, 0.9}, space);
    CHECK(store.p_value(Level::node, 0, 1, 0.5) == 0.75);
  }
  SUBCASE("configured epsilon overrides the per-group floor") {
    auto store = store_with_group(Level::node, 0, 1, {0.1, 0.2}, space, 0.05);
    CHECK(store.p_value(Level::node, 0, 1, 0.95) == 0.05);
  }
  SUBCASE("empty category returns the floor and signals") {
    auto store = store_with_group(Level::node, 0, 1, {0.3}, space);
    bool empty = false;
    CHECK(store.p_value(Level::node, 1, 2, 0.4, {}, &empty) == 1e-4);
    CHECK(empty);
    empty = false;
    CHECK(store.p_value(Level::node, 0, 1, 0.4, "s0", &empty) == 1e-4);
    CHECK(empty);
  }
}

TEST_CASE("store construction guards its invariants") {
  const LabelSpace space{3, 4, 2};
  CalibrationStore store(space);
  CHECK_THROWS_AS(store.add({Level::node, 0, 7, 0.5, "a"}), std::invalid_argument);
  CHECK_THROWS_AS(store.add({Level::node, 5, 0, 0.5, "a"}), std::invalid_argument);
  CHECK_THROWS_AS(store.add({Level::node, 0, 0, 1.5, "a"}), std::invalid_argument);
  CHECK_THROWS_AS(store.add({Level::node, 0, 0, -0.5, "a"}), std::invalid_argument);
  CHECK_THROWS_AS(store.add({Level::event, 0, 1, 0.5, "a"}), std::invalid_argument);

  store.add({Level::node, 0, 0, 0.5, "a"});
  CHECK_THROWS_AS(store.p_value(Level::node, 0, 0, 0.5), std::logic_error);
  store.seal();
  CHECK_THROWS_AS(store.add({Level::node, 0, 0, 0.5, "a"}), std::logic_error);
  CHECK(store.p_value(Level::node, 0, 0, 0.5) == 1.0);
  CHECK_THROWS_AS(store.p_value(Level::node, 0, 0, 1.5), std::invalid_argument);
}

TEST_CASE("p_value_table matches scalar calls entry by entry") {
  const LabelSpace space{3, 2, 4};

  SUBCASE("empty store yields the empty-category floor everywhere") {
    CalibrationStore store(space);
    store.seal();
    std::size_t empties = 0;
    auto table = store.p_value_table(Level::node, std::vector<double>{0.2, 0.3, 0.5}, {}, &empties);
    REQUIRE(table.size() == 4);
    for (const auto& row : table) {
      REQUIRE(row.size() == 3);
      for (double p : row) CHECK(p == 1e-4);
    }
    CHECK(empties == 12);
  }

  SUBCASE("degenerate single-label set") {
    const LabelSpace tiny{1, 1, 2};
    auto store = store_with_group(Level::node, 1, 0, {0.0, 0.0}, tiny);
    auto table = store.p_value_table(Level::node, std::vector<double>{1.0});
    REQUIRE(table.size() == 2);
    REQUIRE(table[0].size() == 1);
    CHECK(table[1][0] == store.p_value(Level::node, 1, 0, 0.0));
    CHECK(table[1][0] == 1.0);
  }

  SUBCASE("random store agrees with independent scalar calls") {
    testutil::Rng rng(41);
    auto store = testutil::random_store(rng, space, 50);
    const auto row = rng.simplex(3);
    auto table = store.p_value_table(Level::node, row);
    for (int c = 0; c < 4; ++c) {
      for (int y = 0; y < 3; ++y) {
        CHECK(table[c][y] == store.p_value(Level::node, c, y, nonconformity(row, y)));
      }
    }
    // event tables are keyed by the predicted class, so rows repeat
    const auto event_row = rng.simplex(4);
    auto event_table = store.p_value_table(Level::event, event_row);
    for (int c = 0; c < 4; ++c) {
      for (int y = 0; y < 4; ++y) CHECK(event_table[c][y] == event_table[0][y]);
    }
  }
}

TEST_CASE("fisher statistic") {
  CHECK(fisher_statistic(std::vector<double>{1.0, 1.0, 1.0}) == 0.0);
  CHECK(fisher_statistic(std::vector<double>{}) == 0.0);
  CHECK(fisher_statistic(std::vector<double>{0.5, 0.1}) ==
        doctest::Approx(5.991464547107982).epsilon(1e-14));
  CHECK_THROWS_AS(fisher_statistic(std::vector<double>{0.5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(fisher_statistic(std::vector<double>{-0.1}), std::invalid_argument);
}

TEST_CASE("randomized stores match the counting oracle bit for bit") {
  testutil::Rng rng(2024);
  const Level levels[] = {Level::node, Level::edge, Level::event};
  for (int trial = 0; trial < 300; ++trial) {
    const LabelSpace space{1 + rng.below(5), 1 + rng.below(5), 1 + rng.below(4)};
    const bool fixed_eps = rng.below(3) == 0;
    const std::optional<double> eps =
        fixed_eps ? std::optional<double>(rng.uniform(0.0, 0.05)) : std::nullopt;
    auto store = testutil::random_store(rng, space, 500, eps);

    for (int probe = 0; probe < 10; ++probe) {
      const Level level = levels[rng.below(3)];
      const int c = rng.below(space.event_classes);
      const int y = level == Level::event ? c : rng.below(space.label_count(level));
      const double query = rng.uniform();
      const std::string exclude =
          rng.below(2) ? "src-" + std::to_string(rng.below(8)) : std::string();

      bool empty = false;
      const double got = store.p_value(level, c, y, query, exclude, &empty);
      const double want = oracle::p_value_scan(store.records(), level, c, y, query, exclude, eps);
      CHECK(got == want);
      CHECK(got >= store.floor_for(store.group_size(level, c, y)) * 0.0);  // nonnegative
      CHECK(got <= 1.0);

      // leave-one-out with an id absent from the store changes nothing
      CHECK(store.p_value(level, c, y, query, "no-such-id") ==
            store.p_value(level, c, y, query));
    }
  }
}

TEST_CASE("p_value is non-increasing in the query nonconformity") {
  testutil::Rng rng(7);
  const LabelSpace space{4, 3, 3};
  auto store = testutil::random_store(rng, space, 200);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < 4; ++y) {
      double previous = 2.0;
      for (double q = 0.0; q <= 1.0; q += 0.01) {
        const double p = store.p_value(Level::node, c, y, q);
        CHECK(p <= previous);
        previous = p;
      }
    }
  }
}

TEST_CASE("softmax argmax and p-value argmax can disagree") {
  // one class of sloppy-but-typical predictions, one class of sharp ones
  const LabelSpace space{2, 2, 1};
  CalibrationStore store(space);
  int i = 0;
  for (double v : {0.80, 0.85, 0.90, 0.95}) store.add({Level::node, 0, 0, v, "a" + std::to_string(i++)});
  for (double v : {0.10, 0.15, 0.20, 0.25}) store.add({Level::node, 0, 1, v, "b" + std::to_string(i++)});
  store.seal();

  const std::vector<double> row{0.45, 0.55};
  CHECK(argmax(row) == 1);
  const double p0 = store.p_value(Level::node, 0, 0, nonconformity(row, 0));
  const double p1 = store.p_value(Level::node, 0, 1, nonconformity(row, 1));
  CHECK(p0 == 1.0);           // all sloppy class-0 examples are at least this nonconforming
  CHECK(p1 == store.floor_for(4));  // sharper than every class-1 example ever was
  CHECK(p0 > p1);             // the confidence order reverses the softmax order
}

TEST_CASE("store serialization round-trips exactly") {
  testutil::Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const LabelSpace space{1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(5)};
    const std::optional<double> eps =
        rng.below(2) ? std::optional<double>(rng.uniform(0.0, 0.01)) : std::nullopt;
    auto store = testutil::random_store(rng, space, 120, eps);

    std::stringstream buffer;
    store.save(buffer);
    auto reloaded = CalibrationStore::load(buffer);
    CHECK(reloaded == store);
    CHECK(reloaded.sealed());

    // queries agree bit for bit after the round trip
    const double q = rng.uniform();
    const int c = rng.below(space.event_classes);
    CHECK(reloaded.p_value(Level::node, c, 0, q) == store.p_value(Level::node, c, 0, q));
  }
}

TEST_CASE("store loader rejects malformed input with line numbers") {
  {
    std::stringstream in("garbage header\n");
    CHECK_THROWS_WITH_AS(CalibrationStore::load(in), doctest::Contains("line 1"), DataError);
  }
  {
    std::stringstream in(
        "node_labels=2\tedge_labels=2\tevent_classes=2\tepsilon=auto\n"
        "node\t0\t0\t0.5\tok\n"
        "node\t0\tnope\t0.5\tbad\n");
    CHECK_THROWS_WITH_AS(CalibrationStore::load(in), doctest::Contains("line 3"), DataError);
  }
  {
    std::stringstream in(
        "node_labels=2\tedge_labels=2\tevent_classes=2\tepsilon=auto\n"
        "wat\t0\t0\t0.5\tok\n");
    CHECK_THROWS_AS(CalibrationStore::load(in), DataError);
  }
}
