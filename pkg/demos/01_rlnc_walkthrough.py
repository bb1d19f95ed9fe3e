"""
Random linear network coding on one video frame
===============================================

A frame is cut into k systematic symbols and topped up with n-k coded
symbols whose GF(2^8) coefficients are regenerated from a shared seed.
Any k linearly independent packets bring the frame back.
"""

import numpy as np

from framefec.rlnc import DecoderState, FecBlockSpec, InsufficientRankError, rlnc_encode

rng = np.random.default_rng(7)
frame = rng.bytes(5200)  # a small P-frame
S = 1500
k = -(-len(frame) // S)
spec = FecBlockSpec(block_id=42, k=k, n=k + 2, symbol_size=S)
packets = rlnc_encode(frame, spec, rng_seed=2024)
print(f"frame of {len(frame)} bytes -> k={spec.k} systematic + r={spec.r} coded packets")

# %%
# Drop two systematic packets and let the coded ones fill the gap.

dec = DecoderState(spec)
for pkt in packets:
    if pkt.index in (0, 2):
        continue
    useful = dec.absorb(pkt)
    print(f"packet {pkt.index} ({'sys' if pkt.systematic else 'coded'}): useful={useful} rank={dec.rank}/{k}")

out = dec.recover()[: len(frame)]
print("recovered bytes match:", out == frame)

# %%
# With three erasures the rank stalls and recovery refuses.

dec = DecoderState(spec)
for pkt in packets[3:]:
    dec.absorb(pkt)
try:
    dec.recover()
except InsufficientRankError as e:
    print("as expected:", e)

# %%
# Decoding probability over random erasure patterns, one extra coded packet
# beyond the minimum. Random GF(256) combinations are nearly always full rank.

trials, ok = 500, 0
spec = FecBlockSpec(block_id=7, k=6, n=10, symbol_size=64)
payload = rng.bytes(6 * 64)
packets = rlnc_encode(payload, spec, rng_seed=1)
for _ in range(trials):
    keep = rng.choice(spec.n, size=spec.k, replace=False)
    dec = DecoderState(spec)
    for i in keep:
        dec.absorb(packets[i])
    ok += dec.complete
print(f"any-k decodability: {ok}/{trials}")
