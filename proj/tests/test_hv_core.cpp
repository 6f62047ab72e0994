#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "topohd/container.hpp"
#include "topohd/encoders.hpp"
#include "topohd/hypervector.hpp"
#include "topohd/prototype_bank.hpp"
#include "topohd/rng.hpp"

using namespace topohd;

namespace {

Hypervector hv(std::vector<std::int8_t> v) { return Hypervector::from_values(std::move(v)); }

// Independent rebuild of the seeded vectors: SplitMix64 finalizer and the
// low-bit-first expansion of raw mt19937_64 words.
std::uint64_t oracle_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
std::uint64_t oracle_derive(std::uint64_t base, std::uint64_t tag) {
  return oracle_mix(oracle_mix(base) ^ (tag * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}
std::vector<int> oracle_random(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<int> out(dim);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i % 64 == 0) word = eng();
    out[i] = ((word >> (i % 64)) & 1) ? 1 : -1;
  }
  return out;
}

}  // namespace

TEST_SUITE("hv-core") {
  TEST_CASE("bind examples") {
    const Hypervector v = Hypervector::random(64, 5);
    CHECK(bind(v, Hypervector(64)) == v);
    CHECK(bind(v, v) == Hypervector(64));
    CHECK(bind(hv({1, -1, 1}), hv({-1, -1, 1})) == hv({-1, 1, 1}));
    CHECK_THROWS(bind(Hypervector(3), Hypervector(4)));
  }

  TEST_CASE("bind is self-inverse, commutative and bipolar") {
    for (std::size_t dim : {64u, 10000u}) {
      for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = Hypervector::random(dim, 2 * s), b = Hypervector::random(dim, 2 * s + 1);
        const auto ab = bind(a, b);
        CHECK(bind(ab, b) == a);
        CHECK(ab == bind(b, a));
        CHECK(std::all_of(ab.values().begin(), ab.values().end(), [](std::int8_t x) { return x == 1 || x == -1; }));
      }
    }
  }

  TEST_CASE("from_values rejects non-bipolar entries") { CHECK_THROWS(hv({1, 0, -1})); }

  TEST_CASE("bundle examples") {
    const Hypervector v = Hypervector::random(100, 3);
    const WeightedHypervector one[] = {{&v, 1.0}};
    CHECK(bundle(one) == v);
    const Hypervector a = hv({1, -1}), b = hv({-1, -1});
    const WeightedHypervector two[] = {{&a, 1.0}, {&b, 1.0}};
    CHECK(bundle(two) == hv({1, -1}));
  }

  TEST_CASE("bundle errors") {
    const Hypervector a = hv({1, -1});
    CHECK_THROWS(bundle(std::span<const WeightedHypervector>{}));
    const WeightedHypervector zero[] = {{&a, 0.0}, {&a, 0.0}};
    CHECK_THROWS(bundle(zero));
    const WeightedHypervector negative[] = {{&a, -1.0}};
    CHECK_THROWS(bundle(negative));
  }

  TEST_CASE("bundle is permutation invariant, including real weights") {
    std::mt19937_64 eng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Hypervector> hs;
      for (int i = 0; i < 9; ++i) hs.push_back(Hypervector::random(512, eng()));
      std::vector<WeightedHypervector> items;
      for (std::size_t i = 0; i < hs.size(); ++i) {
        items.push_back({&hs[i], trial % 2 ? 1.0 : std::uniform_real_distribution<double>(0.0, 2.0)(eng)});
      }
      const Hypervector ref = bundle(items);
      for (int p = 0; p < 5; ++p) {
        std::shuffle(items.begin(), items.end(), eng);
        CHECK(bundle(items) == ref);
      }
    }
  }

  TEST_CASE("random hypervectors are quasi-orthogonal at D=10000") {
    int below = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const auto a = Hypervector::random(10000, derive_seed(1, i)), b = Hypervector::random(10000, derive_seed(2, i));
      below += std::abs(similarity(a, b)) < 0.05 ? 1 : 0;
    }
    CHECK(below >= 999);
  }

  TEST_CASE("role vectors regenerate from their seed") {
    const auto a = RoleVector::make(Role::outer_hog, 1000, 10000);
    const auto b = RoleVector::make(Role::outer_hog, 1000, 10000);
    CHECK(a.vector == b.vector);
    CHECK(role_name(Role::outer_zernike) == "outer-zernike");
  }

  TEST_CASE("projection examples") {
    // D = 8, k = 2: x = (1, 0) with mu = 0, sigma = 1 selects column 0 of W.
    std::vector<float> w = {0.5f, 3.0f, -1.0f, 2.0f, 2.0f, -9.0f, -0.1f, 0.0f,
                            1.5f, 1.0f, -2.5f, 4.0f, 0.25f, -1.0f, -3.0f, 7.0f};
    const ProjectionEncoder enc(8, w, {0.0, 0.0}, {1.0, 1.0});
    const float x[] = {1.0f, 0.0f};
    CHECK(enc.encode(x) == hv({1, -1, 1, -1, 1, -1, 1, -1}));
    // x = mu: every projection is 0 -> +1.
    const ProjectionEncoder centered(8, w, {0.75, -2.0}, {1.0, 4.0});
    const float mu[] = {0.75f, -2.0f};
    CHECK(centered.encode(mu) == Hypervector(8));
    CHECK(enc.encode(x) == enc.encode(x));
    const float bad[] = {1.0f};
    CHECK_THROWS(enc.encode(bad));
  }

  TEST_CASE("projection is invariant to positive scaling of W") {
    std::mt19937_64 eng(3);
    std::normal_distribution<float> n01;
    std::vector<float> w(64 * 5);
    for (auto& v : w) v = n01(eng);
    std::vector<float> w3 = w;
    for (auto& v : w3) v *= 4.0f;  // exact in binary floating point
    const ProjectionEncoder a(64, w, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
    const ProjectionEncoder b(64, w3, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0));
    for (int i = 0; i < 20; ++i) {
      float x[5];
      for (auto& v : x) v = n01(eng);
      CHECK(a.encode(x) == b.encode(x));
    }
  }

  TEST_CASE("fit_projection") {
    FeatureMatrix train(100, 6);
    std::mt19937_64 eng(9);
    std::normal_distribution<float> n01;
    for (std::size_t i = 0; i < train.rows; ++i) {
      for (std::size_t j = 0; j < 6; ++j) train.row(i)[j] = j == 5 ? 2.5f : n01(eng) * static_cast<float>(j + 1);
    }
    const auto a = ProjectionEncoder::fit(train, 10000, 1);
    const auto b = ProjectionEncoder::fit(train, 10000, 1);
    CHECK(a.weights() == b.weights());
    CHECK(a.mean() == b.mean());
    CHECK(a.scale()[5] == 1.0);  // constant column
    CHECK(a.mean()[5] == doctest::Approx(2.5));

    // The constant column does not move the output.
    float x[6] = {0.1f, -0.2f, 0.3f, 0.4f, -0.5f, 2.5f};
    float y[6] = {0.1f, -0.2f, 0.3f, 0.4f, -0.5f, 2.5f};
    CHECK(a.encode(x) == a.encode(y));

    // Different seeds decorrelate.
    const auto c = ProjectionEncoder::fit(train, 10000, 2);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(std::abs(similarity(a.encode(train.row(i)), c.encode(train.row(i)))) < 0.1);
    }

    FeatureMatrix one(1, 3);
    CHECK_THROWS(ProjectionEncoder::fit(one, 100, 1));
  }

  TEST_CASE("batched projection equals single encodes for any worker count") {
    FeatureMatrix x(13, 37);
    std::mt19937_64 eng(4);
    std::normal_distribution<float> n01;
    for (auto& v : x.values) v = n01(eng);
    const auto enc = ProjectionEncoder::fit(x, 2000, 8);
    const auto serial = enc.encode_batch(x, 1);
    const auto parallel = enc.encode_batch(x, 4);
    for (std::size_t i = 0; i < x.rows; ++i) {
      CHECK(serial[i] == enc.encode(x.row(i)));
      CHECK(parallel[i] == serial[i]);
    }
  }

  TEST_CASE("level table flip schedule") {
    const LevelTable t(10000, 101, 77);
    for (std::size_t q = 0; q + 1 < t.levels(); ++q) CHECK(hamming(t.level(q), t.level(q + 1)) == 100);
    CHECK(hamming(t.level(0), t.level(100)) >= 4500);
    CHECK(hamming(t.level(0), t.level(100)) == 10000);
    for (std::size_t q = 1; q < t.levels(); ++q) CHECK(hamming(t.level(0), t.level(q)) > hamming(t.level(0), t.level(q - 1)));
    const LevelTable odd(1000, 7, 1);
    for (std::size_t q = 0; q + 1 < odd.levels(); ++q) {
      const auto d = hamming(odd.level(q), odd.level(q + 1));
      CHECK((d == 166 || d == 167));
    }
    CHECK(t.quantize(-1.0, 0.0, 1.0) == 0);
    CHECK(t.quantize(2.0, 0.0, 1.0) == 100);
    CHECK(t.quantize(0.5, 0.0, 1.0) == 50);
    CHECK(t.quantize(0.3, 1.0, 1.0) == 0);
  }

  TEST_CASE("hole set encoding") {
    const std::size_t width = 16, dim = 10000;
    const std::uint64_t seed = 123;
    std::vector<double> lower(width, 0.0), upper(width, 1.0);
    const HoleSetEncoder enc(dim, 101, width, seed, lower, upper);

    SUBCASE("zero holes give the reserved vector") {
      const std::vector<double> rows(4 * width, 0.3);
      const std::vector<std::uint8_t> none(4, 0);
      CHECK(enc.encode(rows, none) == enc.no_hole());
      CHECK(enc.no_hole() == Hypervector::random(dim, derive_seed(seed, HoleSetEncoder::kNoHoleTag)));
    }

    SUBCASE("hole order does not matter") {
      std::mt19937_64 eng(5);
      std::uniform_real_distribution<double> u;
      std::vector<double> rows(3 * width);
      for (auto& v : rows) v = u(eng);
      const std::vector<std::uint8_t> valid = {1, 1, 1};
      std::vector<double> swapped(rows);
      std::swap_ranges(swapped.begin(), swapped.begin() + width, swapped.begin() + 2 * width);
      CHECK(enc.encode(rows, valid) == enc.encode(swapped, valid));
      // Padding slots are ignored.
      std::vector<double> padded(rows);
      padded.resize(4 * width, 0.9);
      const std::vector<std::uint8_t> valid4 = {1, 1, 1, 0};
      CHECK(enc.encode(padded, valid4) == enc.encode(rows, valid));
    }

    SUBCASE("one hole at level 0 matches an independent rebuild") {
      const std::vector<double> hole(width, 0.0);
      const std::vector<std::uint8_t> valid = {1};
      const auto level0 = oracle_random(dim, oracle_derive(oracle_derive(seed, 1), 0));
      std::vector<int> sums(dim, 0);
      for (std::size_t j = 0; j < width; ++j) {
        const auto role = oracle_random(dim, oracle_derive(seed, 100 + j));
        for (std::size_t i = 0; i < dim; ++i) sums[i] += level0[i] * role[i];
      }
      const Hypervector got = enc.encode(hole, valid);
      bool same = true;
      for (std::size_t i = 0; i < dim; ++i) same = same && got[i] == (sums[i] < 0 ? -1 : 1);
      CHECK(same);
    }

    SUBCASE("length mismatch") {
      const std::vector<double> rows(width + 1, 0.0);
      const std::vector<std::uint8_t> valid = {1};
      CHECK_THROWS(enc.encode(rows, valid));
    }
  }

  TEST_CASE("hole encoder fit uses per-feature bounds") {
    const std::vector<double> rows = {0.0, 5.0, 2.0, -1.0, 1.0, 3.0};  // 3 rows x 2
    const auto enc = HoleSetEncoder::fit(rows, 2, 256, 101, 1);
    CHECK(enc.lower() == std::vector<double>{0.0, -1.0});
    CHECK(enc.upper() == std::vector<double>{2.0, 5.0});
    const auto empty = HoleSetEncoder::fit({}, 2, 256, 101, 1);
    CHECK(empty.lower() == std::vector<double>{0.0, 0.0});
    CHECK(empty.upper() == std::vector<double>{1.0, 1.0});
  }

  TEST_CASE("cosine examples") {
    const auto h = Hypervector::random(1000, 1);
    Accumulator p(1000);
    CHECK(cosine(h, p) == 0.0);
    p.add(h);
    CHECK(cosine(h, p) == doctest::Approx(1.0).epsilon(1e-6));
    Accumulator q(1000);
    q.add(h, -3);
    CHECK(cosine(h, q) == doctest::Approx(-1.0).epsilon(1e-6));
  }

  TEST_CASE("accumulate examples") {
    PrototypeBank bank(Channel::hog, 3, 500);
    const auto h = Hypervector::random(500, 2);
    bank.accumulate(h, 1);
    CHECK(std::equal(bank.prototype(1).counts().begin(), bank.prototype(1).counts().end(), h.values().begin()));
    bank.accumulate(h, 1);
    for (std::size_t i = 0; i < 500; ++i) CHECK(bank.prototype(1)[i] == 2 * h[i]);
    CHECK_THROWS_AS(bank.accumulate(h, 3), std::out_of_range);

    std::vector<Hypervector> hs;
    for (int i = 0; i < 30; ++i) hs.push_back(Hypervector::random(500, 100 + i));
    PrototypeBank a(Channel::hog, 3, 500), b(Channel::hog, 3, 500);
    for (std::size_t i = 0; i < hs.size(); ++i) a.accumulate(hs[i], i % 3);
    for (std::size_t i = hs.size(); i-- > 0;) b.accumulate(hs[i], i % 3);
    CHECK(a == b);
    // Unit-weight bound |count| <= n.
    for (std::size_t c = 0; c < 3; ++c) {
      for (auto v : a.prototype(c).counts()) CHECK(std::abs(v) <= 10);
    }
  }

  TEST_CASE("online update examples") {
    const auto h = Hypervector::random(800, 1);
    PrototypeBank bank(Channel::zernike, 2, 800);
    bank.accumulate(h, 0);
    const PrototypeBank copy = bank;
    CHECK_FALSE(bank.online_update(h, 0));
    CHECK(bank == copy);

    // P[y] = 0 before: after one update with eta = 1 it equals h.
    CHECK(bank.online_update(h, 1));
    CHECK(std::equal(bank.prototype(1).counts().begin(), bank.prototype(1).counts().end(), h.values().begin()));
    for (auto v : bank.prototype(0).counts()) CHECK(v == 0);
  }

  TEST_CASE("a corrective update raises the true-class cosine") {
    std::mt19937_64 eng(21);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t dim = 256, classes = 4;
      PrototypeBank bank(Channel::hog, classes, dim);
      for (int i = 0; i < 12; ++i) bank.accumulate(Hypervector::random(dim, eng()), eng() % classes);
      const auto h = Hypervector::random(dim, eng());
      const std::size_t y = eng() % classes;
      const auto eta = static_cast<std::int32_t>(1 + eng() % 3);
      if (bank.predict(h) == y) continue;
      // Exact integer recomputation of the updated cosine.
      std::vector<std::int64_t> p(bank.prototype(y).counts().begin(), bank.prototype(y).counts().end());
      std::int64_t dot0 = 0, n0 = 0, dot1 = 0, n1 = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        dot0 += p[i] * h[i];
        n0 += p[i] * p[i];
        const std::int64_t q = p[i] + eta * h[i];
        dot1 += q * h[i];
        n1 += q * q;
      }
      bank.online_update(h, y, eta);
      CHECK(bank.prototype(y).squared_norm() == n1);
      CHECK(bank.prototype(y).dot(h) == dot1);
      const double before = n0 == 0 ? 0.0 : dot0 / std::sqrt(static_cast<double>(n0));
      const double after = dot1 / std::sqrt(static_cast<double>(n1));
      if (n0 != 0) {
        // P[y] is not a negative multiple of h here, so the cosine must rise.
        CHECK(after > before);
      }
      ++checked;
    }
    CHECK(checked > 50);
  }

  TEST_CASE("argmax ties go to the lowest class") {
    CHECK(argmax_lowest({0.2, 0.5, 0.5}) == 1);
    CHECK(argmax_lowest({0.0, 0.0}) == 0);
  }

  TEST_CASE("container round trip") {
    FeatureMatrix x(20, 7);
    std::mt19937_64 eng(6);
    std::normal_distribution<float> n01;
    for (auto& v : x.values) v = n01(eng);
    const auto proj = ProjectionEncoder::fit(x, 300, 42);
    const HoleSetEncoder holes(300, 11, 3, 9, {0.0, -1.0, 2.0}, {1.0, 1.0, 4.0});
    PrototypeBank bank(Channel::holes, 3, 300);
    bank.accumulate(Hypervector::random(300, 1), 2);
    bank.accumulate(Hypervector::random(300, 2), 0);

    Container c;
    ByteWriter w1, w2, w3;
    write_projection(w1, proj);
    write_hole_encoder(w2, holes);
    write_bank(w3, bank);
    c.put("PROJ", w1.bytes());
    c.put("HOLE", w2.bytes());
    c.put("BANK", w3.bytes());
    const auto bytes = c.serialize();
    CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "THDC1");

    const Container back = Container::parse(bytes);
    ByteReader r1(back.get("PROJ")), r2(back.get("HOLE")), r3(back.get("BANK"));
    const auto proj2 = read_projection(r1);
    const auto holes2 = read_hole_encoder(r2);
    const auto bank2 = read_bank(r3);
    CHECK(proj2.weights() == proj.weights());
    CHECK(proj2.mean() == proj.mean());
    CHECK(proj2.scale() == proj.scale());
    CHECK(holes2.no_hole() == holes.no_hole());
    CHECK(holes2.lower() == holes.lower());
    CHECK(bank2 == bank);
    CHECK(proj2.encode(x.row(3)) == proj.encode(x.row(3)));

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS(Container::parse(bad));
    auto truncated = bytes;
    truncated.resize(truncated.size() - 3);
    CHECK_THROWS(Container::parse(truncated));
    CHECK_THROWS(back.get("NONE"));
  }
}
