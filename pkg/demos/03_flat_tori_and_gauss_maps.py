"""Flat tori in the 3-sphere and their degenerate Gauss maps.

The preimage of any closed curve on S2 under the Hopf projection is an
intrinsically flat torus.  Translating the unit normal to the identity by
left and right quaternion multiplication gives two maps to S2, and for
flat surfaces both images collapse to curves; round spheres, by contrast,
spread their translated normals over all of S2.  Weiner's conditions say
which curve pairs can arise: zero total geodesic curvature and subinterval
sums below pi.
"""

import numpy as np

from s3flow.gaussmaps import degeneracy_measure, fiber_average_curve, gauss_maps
from s3flow.mesh import (
    estimate_curvature,
    make_clifford_torus,
    make_geodesic_sphere,
    make_hopf_torus,
)
from s3flow.s2curves import make_great_circle, make_latitude_circle, weiner_check

print("fixture                      max|G|      deg(left)  deg(right)")
for name, mesh in (
    ("clifford 64x64", make_clifford_torus(64, 64)),
    ("hopf over latitude 1.0", make_hopf_torus(make_latitude_circle(1.0, 96), 64)),
    ("hopf over equator", make_hopf_torus(make_great_circle(n=96), 64)),
    ("geodesic sphere r=pi/4", make_geodesic_sphere(np.pi / 4, 3)),
):
    curv = estimate_curvature(mesh)
    img = gauss_maps(mesh)
    print(f"{name:28s} {np.abs(curv.G).max():9.2e}  {degeneracy_measure(img.left):9.4f}  "
          f"{degeneracy_measure(img.right):9.4f}")

print("\nWeiner admissibility of candidate Gauss-image pairs:")
pairs = (
    ("two great circles", make_great_circle(n=256), make_great_circle(axis=(0, 1, 0), n=256)),
    ("two latitude circles", make_latitude_circle(np.pi / 4, 256),
     make_latitude_circle(np.pi / 4, 256)),
)
for name, g1, g2 in pairs:
    rep = weiner_check(g1, g2)
    print(f"  {name:22s} totals ({rep.total_curvature[0]:+.3f}, {rep.total_curvature[1]:+.3f}) "
          f"sup pair {rep.sup_pair:.3f}  ->  {'pass' if rep.verdict else 'fail'}")

hopf = make_hopf_torus(make_latitude_circle(1.0, 96), 64)
curve = fiber_average_curve(gauss_maps(hopf).left, hopf.grid_shape)
rep = weiner_check(curve, curve)
print(f"  {'actual left Gauss image':22s} totals ({rep.total_curvature[0]:+.3f}, "
      f"{rep.total_curvature[1]:+.3f}) sup pair {rep.sup_pair:.3f}  ->  "
      f"{'pass' if rep.verdict else 'fail'}")
