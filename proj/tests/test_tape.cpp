#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "diffgrasp/sim.hpp"
#include "diffgrasp/tape.hpp"
#include "diffgrasp/vec.hpp"

using namespace dg;

TEST_CASE("affine function has constant gradient") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(5.0);
  Rec f = Rec(3.0) * x + Rec(2.0);
  tape.set_output(f);
  CHECK(f.v == doctest::Approx(17.0));
  auto g = tape.gradient();
  CHECK(g[0] == doctest::Approx(3.0));
}

TEST_CASE("product rule") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(2.0);
  Rec y = tape.input(3.0);
  tape.set_output(x * y);
  auto g = tape.gradient();
  CHECK(g[0] == doctest::Approx(3.0));
  CHECK(g[1] == doctest::Approx(2.0));
}

TEST_CASE("constants fold without nodes") {
  Tape tape;
  Tape::Scope scope(tape);
  std::size_t before = tape.size();
  Rec c = Rec(2.0) * Rec(3.0) + sqrt(Rec(16.0));
  CHECK(c.is_const());
  CHECK(c.v == doctest::Approx(10.0));
  CHECK(tape.size() == before);
}

TEST_CASE("replay reproduces the recorded output bit-exactly") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(0.7391);
  Rec y = tape.input(-1.234);
  Rec f = sin(x * y) + sqrt(x * x + y * y) / (Rec(1.5) + cos(y));
  f = max(f, x - y) + atan2(y, x) + min(f, Rec(100.0));
  tape.set_output(f);
  double replayed = tape.replay();
  CHECK(replayed == f.v);  // bitwise
}

TEST_CASE("gradients match finite differences on a smooth composite") {
  auto eval = [](double xv, double yv, double* gx = nullptr, double* gy = nullptr) {
    Tape tape;
    Tape::Scope scope(tape);
    Rec x = tape.input(xv);
    Rec y = tape.input(yv);
    Rec f = sin(x * y) * cos(x) + sqrt(x * x + Rec(2.0) * y * y) + atan2(y, x);
    tape.set_output(f);
    if (gx) {
      auto g = tape.gradient();
      *gx = g[0];
      *gy = g[1];
    }
    return f.v;
  };
  double gx, gy;
  eval(0.8, 1.7, &gx, &gy);
  double h = 1e-6;
  double fdx = (eval(0.8 + h, 1.7) - eval(0.8 - h, 1.7)) / (2 * h);
  double fdy = (eval(0.8, 1.7 + h) - eval(0.8, 1.7 - h)) / (2 * h);
  CHECK(gx == doctest::Approx(fdx).epsilon(1e-6));
  CHECK(gy == doctest::Approx(fdy).epsilon(1e-6));
}

TEST_CASE("linearity: gradient of a*f + b*g") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    double xv = uni(rng), a = uni(rng), b = uni(rng);

    auto grad_of = [&](auto fn) {
      Tape tape;
      Tape::Scope scope(tape);
      Rec x = tape.input(xv);
      tape.set_output(fn(x));
      return tape.gradient()[0];
    };
    auto f = [](Rec x) { return sin(x) * x; };
    auto g = [](Rec x) { return sqrt(x) + cos(x); };
    double gf = grad_of(f);
    double gg = grad_of(g);
    double gsum = grad_of([&](Rec x) { return Rec(a) * f(x) + Rec(b) * g(x); });
    CHECK(gsum == doctest::Approx(a * gf + b * gg).epsilon(1e-12));
  }
}

TEST_CASE("adjoint of a sum of tapes equals the sum of adjoints") {
  double xv = 1.3;
  auto make = [&](int which) {
    Tape tape;
    Tape::Scope scope(tape);
    Rec x = tape.input(xv);
    tape.set_output(which == 0 ? sin(x) * x : cos(x) / x);
    return tape.gradient()[0];
  };
  double split = make(0) + make(1);

  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(xv);
  tape.set_output(sin(x) * x + cos(x) / x);
  CHECK(tape.gradient()[0] == doctest::Approx(split).epsilon(1e-14));
}

TEST_CASE("determinism: identical inputs give bit-identical gradients") {
  auto run = [] {
    Tape tape;
    Tape::Scope scope(tape);
    Rec x = tape.input(0.9);
    Rec y = tape.input(2.3);
    Rec f = Rec(0.0);
    for (int i = 0; i < 50; ++i) f += sin(x * Rec(double(i + 1))) * cos(y) / (Rec(1.0) + x * x);
    tape.set_output(f);
    return tape.gradient();
  };
  auto g1 = run();
  auto g2 = run();
  CHECK(g1[0] == g2[0]);
  CHECK(g1[1] == g2[1]);
}

TEST_CASE("max/min route gradient to the selected branch, ties to the first") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(2.0);
  Rec y = tape.input(2.0);
  tape.set_output(max(x, y));
  auto g = tape.gradient();
  CHECK(g[0] == 1.0);
  CHECK(g[1] == 0.0);
}

TEST_CASE("max(0, x) subgradient at exactly zero is zero") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(0.0);
  tape.set_output(max(Rec(0.0), x));
  CHECK(tape.gradient()[0] == 0.0);
}

TEST_CASE("leaky constraint gradient") {
  LeakPolicy policy{0.1};
  Vec3 up{0, 0, 1};
  SUBCASE("contact active: exact gradient") {
    Vec3 g = leaky_constraint_grad(-0.01, up, policy);
    CHECK(g.z == doctest::Approx(1.0));
  }
  SUBCASE("non-contacting: alpha-scaled gradient") {
    Vec3 g = leaky_constraint_grad(0.05, up, policy);
    CHECK(g.z == doctest::Approx(0.1));
  }
  SUBCASE("alpha 0 recovers the exact zero gradient") {
    Vec3 g = leaky_constraint_grad(0.05, up, LeakPolicy{0.0});
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
    CHECK(g.z == 0.0);
  }
}

TEST_CASE("contact gate forward values ignore the leak, backward uses it") {
  SUBCASE("penetrating") {
    Tape tape;
    Tape::Scope scope(tape);
    Rec rho = tape.input(-0.02);
    tape.set_output(contact_gate(rho, 0.1));
    CHECK(tape.output_value() == doctest::Approx(0.02));
    CHECK(tape.gradient()[0] == doctest::Approx(-1.0));
  }
  SUBCASE("separated") {
    Tape tape;
    Tape::Scope scope(tape);
    Rec rho = tape.input(0.05);
    tape.set_output(contact_gate(rho, 0.1));
    CHECK(tape.output_value() == 0.0);
    CHECK(tape.gradient()[0] == doctest::Approx(-0.1));
  }
  SUBCASE("separated, leak disabled") {
    Tape tape;
    Tape::Scope scope(tape);
    Rec rho = tape.input(0.05);
    tape.set_output(contact_gate(rho, 0.0));
    CHECK(tape.gradient()[0] == 0.0);
  }
}

TEST_CASE("non-finite adjoint reports the offending primitive") {
  Tape tape;
  Tape::Scope scope(tape);
  Rec x = tape.input(0.0);
  tape.set_output(Rec(1.0) / x);  // d/dx = -1/x^2 at 0
  CHECK_THROWS_WITH_AS(tape.gradient(), doctest::Contains("div"), std::runtime_error);
}

TEST_CASE("quaternion exp/log round trip and derivatives") {
  Vec3T<double> w{0.3, -0.2, 0.5};
  Quat q = quat_exp(w);
  Vec3 back = quat_log(q);
  CHECK(back.x == doctest::Approx(w.x).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(w.y).epsilon(1e-12));
  CHECK(back.z == doctest::Approx(w.z).epsilon(1e-12));

  // recorded version agrees with finite differences through exp-then-norm
  auto f = [](double wx) {
    Quat q2 = quat_exp(Vec3{wx, -0.2, 0.5});
    return q2.x + 2.0 * q2.w;
  };
  Tape tape;
  Tape::Scope scope(tape);
  Rec wx = tape.input(0.3);
  QuatT<Rec> qr = quat_exp(Vec3T<Rec>{wx, Rec(-0.2), Rec(0.5)});
  tape.set_output(qr.x + Rec(2.0) * qr.w);
  double h = 1e-6;
  double fd = (f(0.3 + h) - f(0.3 - h)) / (2 * h);
  CHECK(tape.gradient()[0] == doctest::Approx(fd).epsilon(1e-6));
}
