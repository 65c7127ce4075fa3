#include <doctest.h>

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <string>
#include <thread>

#include "ditto/errors.hpp"
#include "ditto/parallel.hpp"
#include "ditto/rng.hpp"

using namespace ditto;

TEST_SUITE("parallel") {

TEST_CASE("results come back in task order") {
  for (int workers : {1, 4, 8}) {
    const auto out = parallel_map(1000, workers, [](std::size_t i) { return i; });
    REQUIRE(out.size() == 1000);
    for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == i);
  }
  CHECK(parallel_map(0, 4, [](std::size_t i) { return i; }).empty());
}

TEST_CASE("stream-keyed tasks are independent of the worker count") {
  auto task = [](std::size_t i) {
    Rng rng = rng_stream(5, "task", i);
    double s = 0.0;
    // Uneven work so completion order differs from index order.
    for (std::size_t k = 0; k < 100 + (i * 7919) % 2000; ++k) s += rng.normal();
    return s;
  };
  const auto one = parallel_map(200, 1, task);
  CHECK(parallel_map(200, 4, task) == one);
  CHECK(parallel_map(200, 8, task) == one);
}

TEST_CASE("failures report the smallest failing index") {
  for (int workers : {1, 3, 8}) {
    try {
      parallel_map(100, workers, [](std::size_t i) -> int {
        if (i == 17 || i == 60) throw std::runtime_error("boom " + std::to_string(i));
        std::this_thread::sleep_for(std::chrono::microseconds(i % 5));
        return 0;
      });
      FAIL("expected TaskFailed");
    } catch (const TaskFailed& e) {
      CHECK(e.index() == 17);
      CHECK(std::string(e.what()).find("boom 17") != std::string::npos);
    }
  }
}

TEST_CASE("work is spread across threads") {
  std::atomic<int> live{0}, peak{0};
  parallel_map(64, 4, [&](std::size_t) {
    const int now = ++live;
    int p = peak.load();
    while (now > p && !peak.compare_exchange_weak(p, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --live;
    return 0;
  });
  CHECK(peak.load() > 1);
  CHECK(peak.load() <= 4);
}

}  // TEST_SUITE
