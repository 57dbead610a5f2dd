"""Round-level numbers, optimal schemes and welfare comparison for the running example."""

from genai_forum import (brute_force_revenue_opt, brute_force_welfare_opt, example1_instance,
                         gap_certificate, price_of_anarchy, simulate, strategic_instance)
from genai_forum.model import TrainingScheme
from genai_forum.regulator import contraction_factor


def main():
    inst = example1_instance()
    x0 = simulate(inst, TrainingScheme.no_training(inst.T))
    print(f"u1={x0.u[0]:g} v1={x0.v[0]:.6g} p2={x0.p[1]:.5f} p3={x0.p[2]:.5f}")
    rev = brute_force_revenue_opt(inst)
    wel = brute_force_welfare_opt(inst)
    print(f"revenue-optimal rounds {rev.scheme.training_rounds}, V={rev.objective:.6f}")
    print(f"welfare-optimal rounds {wel.scheme.training_rounds}, U={wel.objective:.4f}")
    xr = simulate(inst, rev.scheme)
    print(f"U(x^r)={xr.U:.4f} U(x^0)={x0.U:.4f} counterfactual={x0.counterfactual:g}")
    cert = gap_certificate(inst)
    if cert is not None:
        print(f"training gap bound {cert.T0}, limiting share {cert.p_limit:.4f}, "
              f"certified by {cert.scheme} at horizon {cert.horizon}")
    print(f"contraction factor at eps=0.002: {contraction_factor(inst, 0.002):.4f}")
    print(f"price of anarchy (strategic, T=20): {price_of_anarchy(strategic_instance(20)):.6f}")


if __name__ == "__main__":
    main()
