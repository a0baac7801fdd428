#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "finact/group.hpp"

using namespace finact;

TEST_CASE("lattice membership and canonical form") {
  auto z2 = Group::free_abelian(2);
  auto h = Subgroup::from_lattice(z2, {{0, 1}});
  CHECK(h.contains(elem_from_vec(z2, {0, 5})));
  CHECK_FALSE(h.contains(elem_from_vec(z2, {1, 0})));

  // {x+y even} has canonical generators (2,0),(1,1)
  auto even_sum = Subgroup::from_lattice(z2, {{1, 1}, {0, 2}});
  auto even_sum_2 = Subgroup::from_lattice(z2, {{2, 0}, {1, 1}});
  CHECK(even_sum.equals(even_sum_2));
  CHECK(even_sum.index() == 2);
}

TEST_CASE("free subgroup membership via folded automaton") {
  auto f2 = Group::free(2);
  auto h = Subgroup::from_words(f2, {{1, 1}, {2}});  // <a^2, b>
  CHECK(h.contains(parse_elem(f2, "aabAA")));
  CHECK_FALSE(h.contains(parse_elem(f2, "a")));
  CHECK(h.contains(identity_elem(f2)));
  CHECK_FALSE(h.index().has_value());  // <a^2, b> has infinite index

  auto k = Subgroup::from_words(f2, {{1, 1}, {2}, {1, 2, -1}});  // <a^2, b, aba^-1>
  CHECK(k.index() == 2);

  auto triv = Subgroup::trivial(f2);
  CHECK_FALSE(triv.index().has_value());
  CHECK(Subgroup::whole(f2).index() == 1);
}

TEST_CASE("product membership examples") {
  auto z = Group::free_abelian(1);
  auto h3 = Subgroup::from_lattice(z, {{3}});
  auto h9 = Subgroup::from_lattice(z, {{9}});
  auto r = product_membership(elem_from_vec(z, {2}), {h3, h9});
  CHECK(r.value == Tri::False);

  auto f2 = Group::free(2);
  auto ha = Subgroup::from_words(f2, {{1}});
  auto hb = Subgroup::from_words(f2, {{2}});
  CHECK(product_membership(parse_elem(f2, "ab"), {ha, hb}).value == Tri::True);

  // modulo F2 -> S3, a -> (12), b -> (13): ba maps to (123), outside <a><b>
  Perm p12{1, 0, 2}, p13{2, 1, 0};
  auto q = FiniteQuotient::from_perms(f2, {p12, p13}, 3);
  auto rm = product_membership(parse_elem(f2, "ba"), {ha, hb}, &q);
  CHECK(rm.value == Tri::False);
  CHECK(product_membership(parse_elem(f2, "ab"), {ha, hb}, &q).value == Tri::True);
}

TEST_CASE("coset representatives") {
  auto z = Group::free_abelian(1);
  auto h5 = Subgroup::from_lattice(z, {{5}});
  auto reps = coset_reps(h5);
  REQUIRE(reps.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(reps[i].vec == Vec{i});

  auto z2 = Group::free_abelian(2);
  auto h = Subgroup::from_lattice(z2, {{2, 0}, {0, 1}});
  auto reps2 = coset_reps(h);
  REQUIRE(reps2.size() == 2);
  CHECK(reps2[0].vec == Vec{0, 0});
  CHECK(reps2[1].vec == Vec{1, 0});

  // F2 / ker(a->1, b->0 in Z/2): reps e, a
  auto f2 = Group::free(2);
  Perm swap{1, 0}, id{0, 1};
  auto q = FiniteQuotient::from_perms(f2, {swap, id}, 2);
  auto ker = q.kernel();
  CHECK(ker.index() == 2);
  auto reps3 = coset_reps(ker);
  REQUIRE(reps3.size() == 2);
  CHECK(reps3[0].word == Word{});
  CHECK(reps3[1].word == Word{1});

  auto triv = Subgroup::trivial(z);
  CHECK_THROWS_AS(coset_reps(triv), UnsupportedError);
}

TEST_CASE("quotient invariants (Smith form)") {
  auto z2 = Group::free_abelian(2);
  auto h = Subgroup::from_lattice(z2, {{0, 1}, {2, -1}});
  auto inv = quotient_invariants(h);
  CHECK(inv.torsion == std::vector<std::int64_t>{2});
  CHECK(inv.free_rank == 0);

  auto z = Group::free_abelian(1);
  auto inv2 = quotient_invariants(Subgroup::from_lattice(z, {{3}}));
  CHECK(inv2.torsion == std::vector<std::int64_t>{3});
  CHECK(inv2.free_rank == 0);

  auto inv3 = quotient_invariants(Subgroup::from_lattice(z2, {{0, 1}}));
  CHECK(inv3.torsion.empty());
  CHECK(inv3.free_rank == 1);
}

TEST_CASE("finite quotient enumeration") {
  auto z = Group::free_abelian(1);
  auto qs = enumerate_finite_quotients(z, {.bound = 3});
  REQUIRE(qs.size() == 3);
  CHECK(qs[0].kernel_index == 1);
  CHECK(qs[1].kernel_index == 2);
  CHECK(qs[2].kernel_index == 3);

  auto z2 = Group::free_abelian(2);
  auto qs2 = enumerate_finite_quotients(z2, {.bound = 2, .exact_index = 2});
  REQUIRE(qs2.size() == 3);
  CHECK(qs2[0].kernel_lat.generators() == Mat{{1, 0}, {0, 2}});
  CHECK(qs2[1].kernel_lat.generators() == Mat{{2, 0}, {0, 1}});
  CHECK(qs2[2].kernel_lat.generators() == Mat{{2, 0}, {1, 1}});

  // F2 onto Z/2: three index-2 kernels
  auto f2 = Group::free(2);
  auto qs3 = enumerate_finite_quotients(f2, {.bound = 2, .exact_index = 2});
  std::set<std::string> kernels;
  int count = 0;
  for (const auto& q : qs3) {
    ++count;
    kernels.insert(q.kernel().str());
  }
  CHECK(count == 3);
  CHECK(kernels.size() == 3);
}

TEST_CASE("quotient kernels have the claimed index") {
  auto z2 = Group::free_abelian(2);
  for (const auto& q : enumerate_finite_quotients(z2, {.bound = 5})) {
    CHECK(static_cast<std::int64_t>(coset_reps(q.kernel()).size()) == q.kernel_index);
  }
  auto f2 = Group::free(2);
  for (const auto& q : enumerate_finite_quotients(f2, {.bound = 3})) {
    CHECK(static_cast<std::int64_t>(coset_reps(q.kernel()).size()) == q.kernel_index);
  }
}

TEST_CASE("property: membership closed under g*h^-1 on word balls") {
  auto z2 = Group::free_abelian(2);
  auto h = Subgroup::from_lattice(z2, {{2, 1}, {0, 3}});
  auto ball = word_ball(z2, 4);
  for (const auto& g : ball)
    for (const auto& k : ball)
      if (h.contains(g) && h.contains(k)) CHECK(h.contains(mul(g, inverse(k))));

  auto f2 = Group::free(2);
  auto hf = Subgroup::from_words(f2, {{1, 1}, {2, 1, -2}});
  auto wball = word_ball(f2, 4);
  for (const auto& g : wball)
    for (const auto& k : wball)
      if (hf.contains(g) && hf.contains(k)) CHECK(hf.contains(mul(g, inverse(k))));
}

TEST_CASE("property: coset reps partition word balls") {
  auto z2 = Group::free_abelian(2);
  auto h = Subgroup::from_lattice(z2, {{2, 0}, {0, 3}});
  auto reps = coset_reps(h);
  for (const auto& g : word_ball(z2, 3)) {
    int hits = 0;
    for (const auto& r : reps)
      if (h.contains(mul(inverse(r), g))) ++hits;
    CHECK(hits == 1);
  }
  auto f2 = Group::free(2);
  Perm p12{1, 0, 2}, p13{2, 1, 0};
  auto q = FiniteQuotient::from_perms(f2, {p12, p13}, 3);
  auto ker = q.kernel();
  auto wreps = coset_reps(ker);
  CHECK(wreps.size() == 6);
  for (const auto& g : word_ball(f2, 3)) {
    int hits = 0;
    for (const auto& r : wreps)
      if (ker.contains(mul(inverse(r), g))) ++hits;
    CHECK(hits == 1);
  }
}

TEST_CASE("property: quotient product membership extends certified answers") {
  std::mt19937 rng(7);
  auto z2 = Group::free_abelian(2);
  std::uniform_int_distribution<int> coeff(-4, 4);
  for (int trial = 0; trial < 40; ++trial) {
    auto h1 = Subgroup::from_lattice(z2, {{coeff(rng), coeff(rng)}, {coeff(rng), coeff(rng)}});
    auto h2 = Subgroup::from_lattice(z2, {{coeff(rng), coeff(rng)}});
    Elem g = elem_from_vec(z2, {coeff(rng), coeff(rng)});
    auto direct = product_membership(g, {h1, h2});
    REQUIRE(direct.certified());
    for (const auto& q : enumerate_finite_quotients(z2, {.bound = 4})) {
      auto modded = product_membership(g, {h1, h2}, &q);
      if (direct.value == Tri::True) CHECK(modded.value == Tri::True);
      if (modded.value == Tri::False) CHECK(direct.value == Tri::False);
    }
  }
}

TEST_CASE("word and element arithmetic on the free group") {
  auto f2 = Group::free(2);
  auto a = parse_elem(f2, "a");
  auto b = parse_elem(f2, "b");
  auto w = mul(mul(a, b), inverse(mul(a, b)));
  CHECK(w.is_identity());
  CHECK(parse_elem(f2, "aA").is_identity());
  CHECK(mul(a, inverse(a)).is_identity());

  // word-ball enumeration has no duplicates
  auto ball = word_ball(f2, 3);
  std::set<std::string> uniq;
  for (const auto& e : ball) uniq.insert(e.str());
  CHECK(uniq.size() == ball.size());
  CHECK(ball.size() == 1 + 4 + 12 + 36);
}

TEST_CASE("subgroup algebra: join, intersect, conjugate") {
  auto z = Group::free_abelian(1);
  auto h3 = Subgroup::from_lattice(z, {{3}});
  auto h5 = Subgroup::from_lattice(z, {{5}});
  CHECK(h3.join(h5).is_whole_group());
  CHECK(h3.intersect(h5).equals(Subgroup::from_lattice(z, {{15}})));

  auto f2 = Group::free(2);
  auto h = Subgroup::from_words(f2, {{1}});    // <a>
  auto hc = h.conjugate(parse_elem(f2, "b"));  // <b a b^-1>
  CHECK(hc.contains(parse_elem(f2, "baB")));
  CHECK(hc.contains(parse_elem(f2, "baaaB")));
  CHECK_FALSE(hc.contains(parse_elem(f2, "a")));

  // intersection of two index-2 subgroups of F2 via kernels
  Perm swap{1, 0}, id{0, 1};
  auto qa = FiniteQuotient::from_perms(f2, {swap, id}, 2);  // kernel: words with even a-count
  auto qb = FiniteQuotient::from_perms(f2, {id, swap}, 2);
  auto inter = qa.kernel().intersect(qb.kernel());
  CHECK(inter.index() == 4);
  CHECK(inter.contains(parse_elem(f2, "aabb")));
  CHECK_FALSE(inter.contains(parse_elem(f2, "ab")));
}
