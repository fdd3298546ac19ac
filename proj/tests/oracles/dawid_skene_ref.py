#!/usr/bin/env python3
# Copyright 2026 The DEXA Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Reference binary Dawid-Skene EM on a seeded sparse label matrix.

Coded from the documented algorithm (majority-vote initialisation with 0.5
on ties; M-step with additive smoothing on priors and confusion rows;
E-step in the log domain; stop when the largest posterior change drops
below tol or after max_iters; label 1 iff posterior > 0.5). Writes
tests/testdata/ds_reference.json:

    python3 dawid_skene_ref.py > ../testdata/ds_reference.json
"""

import json

import numpy as np

SEED = 20240611
ALPHA = 0.01
TOL = 1e-6
MAX_ITERS = 100


def make_matrix(rng):
  # Five annotators with asymmetric noise; three of them label each
  # sentence.
  confusion = np.array([
      [[0.95, 0.05], [0.10, 0.90]],
      [[0.90, 0.10], [0.20, 0.80]],
      [[0.70, 0.30], [0.40, 0.60]],
      [[0.97, 0.03], [0.05, 0.95]],
      [[0.60, 0.40], [0.45, 0.55]],
  ])
  instances = []
  for s in range(60):
    n = int(rng.integers(3, 9))
    truth = (rng.random(n) < 0.3).astype(int)
    annotators = sorted(rng.choice(5, size=3, replace=False).tolist())
    votes = []
    for a in annotators:
      labels = (rng.random(n) < confusion[a][truth, 1]).astype(int)
      votes.append({"annotator": a, "labels": labels.tolist()})
    instances.append({"sentence_id": "s%03d" % s, "votes": votes})
  return instances


def dawid_skene(instances, annotators):
  # Flatten to (token, annotator, label) triples.
  token_votes = []
  for inst in instances:
    n = len(inst["votes"][0]["labels"])
    for t in range(n):
      token_votes.append([(v["annotator"], v["labels"][t])
                          for v in inst["votes"]])
  post = np.empty(len(token_votes))
  for g, votes in enumerate(token_votes):
    ones = sum(l for _, l in votes)
    post[g] = 1.0 if 2 * ones > len(votes) else (
        0.0 if 2 * ones < len(votes) else 0.5)

  lls = []
  converged = False
  iters = 0
  for it in range(1, MAX_ITERS + 1):
    # M-step.
    n = len(token_votes)
    prior1 = (ALPHA + post.sum()) / (2 * ALPHA + n)
    priors = np.array([1 - prior1, prior1])
    counts = np.zeros((annotators, 2, 2))
    for g, votes in enumerate(token_votes):
      for a, l in votes:
        counts[a, 1, l] += post[g]
        counts[a, 0, l] += 1 - post[g]
    conf = (counts + ALPHA) / (counts.sum(axis=2, keepdims=True) + 2 * ALPHA)
    # E-step.
    nxt = np.empty_like(post)
    ll = 0.0
    for g, votes in enumerate(token_votes):
      lp = np.log(priors).copy()
      for a, l in votes:
        lp += np.log(conf[a, :, l])
      ll += np.logaddexp(lp[0], lp[1])
      nxt[g] = np.exp(lp[1] - np.logaddexp(lp[0], lp[1]))
    lls.append(float(ll))
    delta = np.abs(nxt - post).max()
    post = nxt
    iters = it
    if delta < TOL:
      converged = True
      break
  return priors, conf, post, iters, converged, lls


def main():
  rng = np.random.default_rng(SEED)
  instances = make_matrix(rng)
  priors, conf, post, iters, converged, lls = dawid_skene(instances, 5)
  print(json.dumps({
      "smoothing": ALPHA, "tol": TOL, "max_iters": MAX_ITERS,
      "annotators": ["a%d" % a for a in range(5)],
      "instances": instances,
      "class_priors": priors.tolist(),
      "confusion": conf.tolist(),
      "posteriors": post.tolist(),
      "labels": [int(p > 0.5) for p in post],
      "iterations": iters,
      "converged": converged,
      "log_likelihood": lls,
  }))


if __name__ == "__main__":
  main()
