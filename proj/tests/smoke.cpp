#include <cassert>
#include <cstdio>

#include "mrball/normball.hpp"

using namespace mrball;

int main() {
  SurfaceContext ctx = SurfaceContext::modular();
  // trace anchors
  assert(*trace(ctx, primitive_of(3, 2)).exact == 15);
  assert(*trace(ctx, primitive_of(1, -2)).exact == 15);
  assert(*trace(ctx, primitive_of(1, -1)).exact == 6);
  LengthValue L = length(ctx, primitive_of(3, 2));
  std::printf("len(3,2) = %.10f\n", L.value.mid_d());
  auto bp = boundary_point(ctx, primitive_of(1, 0));
  std::printf("bp(1,0) = (%.6f, %.6f)\n", bp.first.mid_d(), bp.second.mid_d());
  AtomRecord a10 = corner_atom(ctx, primitive_of(1, 0));
  AtomRecord a11 = corner_atom(ctx, primitive_of(1, 1));
  AtomRecord a1m1 = corner_atom(ctx, primitive_of(1, -1));
  std::printf("atoms: %.6f %.6f %.6f\n", a10.atom.mid_d(), a11.atom.mid_d(), a1m1.atom.mid_d());
  std::printf("coth residual hi: %.3e\n", a10.coth_residual.hi_d());
  TailTurn t1 = tail_turn(ctx, 1);
  std::printf("tail(1): atoms %.6f gaps %.6f disc %.3e\n", t1.from_atoms.mid_d(),
              t1.from_gaps.mid_d(), t1.discrepancy.hi_d());
  SupportFunctional f = support_functional(ctx, {1, 0}, {0, 1});
  std::printf("lambda#(1,0 | 0,1) = (%.6f, %.6f)\n", f.fx.mid_d(), f.fy.mid_d());
  SinkTriangle sink = bowditch_sink(ctx);
  std::printf("sink H0 = %lld steps=%ld\n", (long long)sink.H0, sink.descent_steps);
  auto tree = markoff_tree(ctx, 100);
  std::printf("markoff triples c<=100: %zu, last c = %s\n", tree.size(),
              tree.back().c.get_str().c_str());
  // surface validation
  bool threw = false;
  try {
    SurfaceContext::from_triple("2", "2", "2");
  } catch (const Error& e) {
    threw = e.code() == Errc::not_on_variety;
  }
  assert(threw);
  SurfaceContext s336 = SurfaceContext::from_triple("3", "3", "6");
  SinkTriangle sink2 = bowditch_sink(s336);
  std::printf("sink(3,3,6): H0=%lld steps=%ld labels (%lld,%lld)(%lld,%lld)(%lld,%lld)\n",
              (long long)sink2.H0, sink2.descent_steps, (long long)sink2.labels[0].p,
              (long long)sink2.labels[0].q, (long long)sink2.labels[1].p,
              (long long)sink2.labels[1].q, (long long)sink2.labels[2].p,
              (long long)sink2.labels[2].q);
  std::printf("smoke ok\n");
  return 0;
}
