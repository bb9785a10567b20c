"""
Transmitting a message and decoding it from clicks
==================================================

Sender and receiver share a seed. From it both derive the same sparse
set of occupied time-bin pairs; the sender fires a faint pulse into the
early or late bin of each occupied pair, the receiver tallies which bin
clicked and takes a majority vote per message bit. Everything below is
simulated sparsely: only the occupied positions are ever touched.
"""

import numpy as np

from covertlink.codec import SharedRandomness, choose_positions, encode_message
from covertlink.planner import PlanRequest, plan
from covertlink.reliability import ChannelModel, bit_error_prob, click_probs
from covertlink.simulator import simulate_transmission

message = "COVERT OK"
bits = encode_message(message)
print(f"message {message!r} -> {bits.size} bits: {''.join(map(str, bits[:10]))}...")

# a short lab-bench link: half the photons survive, mild thermal noise
request = PlanRequest(
    b=int(bits.size),
    epsilon=0.05,
    target_e=0.01,
    channel=ChannelModel(tau=0.5, n_bar_a=1.0e-2, n_bar_b=1.0e-2),
    rep_rate_hz=1.0e6,
)
params = plan(request)
print(f"plan: mu = {params.mu:.4f}, k = {params.k} repetitions/bit,"
      f" d = {params.d} pulses in {params.n_pairs:.3e} pairs"
      f" ({params.running_time_s:.0f} s of air time)")

# both ends derive the occupied positions from the shared seed
shared = SharedRandomness(seed=42)
layout = choose_positions(shared, params.n_pairs, params.q, bits)
print(f"shared draw: {layout.d_prime} occupied pairs,"
      f" first positions {layout.positions[:4]}")

transcript = simulate_transmission(params, layout, rng_seed=7)
print(f"\ndecoded: {transcript.decoded!r}")
assert transcript.decoded == message

# observed per-pulse statistics against the closed-form channel model
cp = click_probs(params.mu, params.channel)
stats = transcript.stats
print("\nobserved vs modeled:")
print(f"  signal-bin click rate {stats.signal_bin_click_rate:.4f}  model {cp.p_correct:.4f}")
print(f"  noise-bin click rate  {stats.noise_bin_click_rate:.4f}  model {cp.p_wrong:.4f}")
print(f"  vote error rate       {stats.vote_error_rate:.4f}"
      f"  model {cp.p_wrong / (cp.p_correct + cp.p_wrong):.4f}")
print(f"  clicks per bit        {stats.clicks_per_bit:.1f}")
print(f"  bit errors            {stats.message_bit_error_rate * params.b:.0f} of {params.b}"
      f"  (per-bit model {bit_error_prob(params.k, cp):.2e})")

# the first few per-bit tallies: zero-votes vs one-votes
print("\nper-bit majority tallies (first 5):")
for tally in transcript.tallies[:5]:
    print(f"  bit {tally.bit_index}: sent {tally.sent}  votes 0:{tally.zero_votes}"
          f" 1:{tally.one_votes}  decoded {tally.decoded}"
          + ("  TIE" if tally.tie else ""))
