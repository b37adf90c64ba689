"""Walk through a full analysis of the two-block toy data.

Run with ``python3 demos/toy_walkthrough.py [seed]``. Takes a few seconds.
"""

import sys

import numpy as np

from ajive import diagnose, ajive, scree
from ajive.blocks import MultiBlockDataset, center_rows
from ajive.linalg import principal_angles
from ajive.synth import baseline_concat_svd, baseline_pls, make_toy


def main(seed: int = 0) -> None:
    ds, truth = make_toy(seed=seed)
    print(f"X is {ds['X'].shape}, Y is {ds['Y'].shape}; X is four orders of magnitude louder")

    # Step 1 starts from the scree: X shows a gap after 2 values, Y after 3
    for name in ds.names:
        s = scree(ds[name])[:6]
        print(f"scree {name}: " + "  ".join(f"{v:.4g}" for v in s))

    # Step 2 diagnostics for a few initial rank choices
    print("\ninitial ranks -> candidate joint rank, verdicts, angles")
    for ranks in [(2, 2), (2, 3), (3, 3), (2, 4)]:
        d = diagnose(ds, ranks, seed=seed)
        angles = ", ".join(f"{a:.1f}" for a in d.principal_angles_deg)
        flag = "  [Wedin bound uninformative]" if d.wedin_uninformative else ""
        print(
            f"  {ranks}: {d.joint_rank_candidate}  {[v.value for v in d.verdicts]}  "
            f"angles {angles}  cutoffs wedin {d.wedin_cutoff:.1f} random {d.random_cutoff:.1f}{flag}"
        )

    # Step 3 with the ranks the scree suggests
    res = ajive(ds, (2, 3), seed=seed)
    angle = principal_angles(res.joint_basis, truth.joint_space)[0]
    print(f"\nfinal joint rank {res.joint_rank}, individual ranks {res.individual_ranks}")
    print(f"recovered joint direction is {angle:.2f} degrees from the truth")
    for name, bt in zip(ds.names, truth.blocks):
        dec = res[name]
        err = np.linalg.norm(dec.individual - bt.individual) / np.linalg.norm(bt.individual)
        print(f"  {name}: individual relative error {err:.3f}")

    # methods that ignore the joint/individual split
    concat = baseline_concat_svd(ds, 2)
    pj = truth.joint_space.projector()
    iy = truth["Y"].individual
    err = np.linalg.norm(concat["Y"] - concat["Y"] @ pj - iy) / np.linalg.norm(iy)
    print(f"\nrank-2 SVD of the stacked blocks: Y individual relative error {err:.3f}")
    pls = baseline_pls(MultiBlockDataset(tuple(center_rows(b) for b in ds.blocks)), 1)
    pls_angle = principal_angles(pls.score_directions(0)[:, :1], truth.joint_space)[0]
    print(f"first PLS score direction is {pls_angle:.1f} degrees from the joint direction")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)
