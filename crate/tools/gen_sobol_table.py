import os, numpy as np, scipy
z = np.load(os.path.join(os.path.dirname(scipy.stats.__file__), '_sobol_direction_numbers.npz'))
poly, vinit = z['poly'], z['vinit']
D = 64
out = ["# Sobol direction numbers (Joe & Kuo, new-joe-kuo-6.21201), first %d dimensions." % D,
       "# columns: degree  coefficient_mask  m_1 .. m_degree",
       "# dimension 1 is the van der Corput sequence (degree 0, all m = 1)."]
out.append("0 0")
for d in range(1, D):
    p = int(poly[d]); s = p.bit_length() - 1
    a = (p >> 1) & ((1 << (s - 1)) - 1) if s > 1 else 0
    m = [int(v) for v in vinit[d, :s]]
    out.append(" ".join(str(v) for v in [s, a] + m))
open('/root/crate/crates/core/data/sobol_directions.txt', 'w').write("\n".join(out) + "\n")
