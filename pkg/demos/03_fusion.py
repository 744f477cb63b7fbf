"""Two score channels, one decision.

Blow distances live on an arbitrary scale (DTW cost), face distances on
another (cosine, in [0,2]).  This walk-through normalizes both with
min-max over an enrollment population, fuses them with a weighted sum,
and calibrates a per-user threshold as the q-th smallest genuine score.
Run from the repository root:

    python3 demos/03_fusion.py
"""

import numpy as np

from blowauth import (
    DecisionConfig,
    KernelConfig,
    authenticate,
    calibrate_threshold,
    cosine_distance,
    fit_bounds,
    fuse,
    knn_score,
    pairwise_matrix,
    synth_dataset,
    synth_embeddings,
)


def main():
    rng = np.random.default_rng(5)
    ds = synth_dataset(6, 8, length=150, seed=5, noise=0.03)
    embs = synth_embeddings(6, 8, sigma=0.08, seed=6)
    ds = ds.with_embeddings(embs)
    records = ds.records

    blow = pairwise_matrix(
        [r.series for r in records], KernelConfig("dtw"), ids=[r.key for r in records]
    ).values
    face = np.array(
        [[cosine_distance(a.embedding, b.embedding) for b in records] for a in records]
    )
    off = ~np.eye(len(records), dtype=bool)
    print(f"raw scales differ: blow dtw spans [{blow[off].min():.2f}, "
          f"{blow[off].max():.2f}], face cosine spans [{face[off].min():.4f}, "
          f"{face[off].max():.4f}]")

    nb, nf = fit_bounds(blow[off]), fit_bounds(face[off])
    fused = fuse(nb.apply(blow), nf.apply(face), (0.5, 0.5))
    print(f"after min-max + equal-weight fusion everything lives in [0,1]: "
          f"span [{fused[off].min():.4f}, {fused[off].max():.4f}]")
    print()

    # enroll user u000 on its fused scores and calibrate at q = 7 of n = 8
    own = [i for i, r in enumerate(records) if r.user_id == "u000"]
    strangers = [i for i in range(len(records)) if i not in own]
    genuine = []
    for i in own:
        rest = [j for j in own if j != i]
        genuine.append(knn_score(fused[i, rest], k=1))
    cfg = DecisionConfig(kernel=KernelConfig("dtw"), k=1, q=7)
    th = calibrate_threshold(genuine, cfg.q, user_id="u000", config=cfg,
                             norm_blow=nb, norm_face=nf)
    print(f"u000 genuine fused scores: "
          + ", ".join(f"{g:.4f}" for g in sorted(genuine)))
    print(f"threshold tau = 7th smallest = {th.tau:.4f} "
          f"(by construction 7 of 8 enrollment sessions pass)")
    print()

    accepted_own = sum(authenticate(g, th) for g in genuine)
    impostor = [knn_score(fused[j, own], k=1) for j in strangers]
    accepted_imp = sum(authenticate(s, th) for s in impostor)
    print(f"replaying enrollment: {accepted_own}/{len(genuine)} genuine accepted")
    print(f"impostor attempts:    {accepted_imp}/{len(impostor)} accepted "
          f"(closest stranger scored {min(impostor):.4f})")
    margin = min(impostor) - th.tau
    print(f"decision margin to the nearest impostor: {margin:+.4f}")


if __name__ == "__main__":
    main()
