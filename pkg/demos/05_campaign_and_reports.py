"""End-to-end mini campaign: corpus -> injection runs -> reports.

Equivalent to:

    voltfi --config demo.cfg --out demo_out genmaps
    voltfi --config demo.cfg --out demo_out run
    voltfi --config demo.cfg --out demo_out report
    voltfi --config demo.cfg --out demo_out heatmap --method hw

The full-scale study uses corpus.n_srams = 2060 (the seven-voltage sweep
then holds 14420 hardware-like maps); this demo is scaled down to finish
in about a minute.
"""

from pathlib import Path

from voltfi.cli import main

out = Path(__file__).parent / "demo_out"
cfg_path = out / "demo.cfg"
out.mkdir(exist_ok=True)
cfg_path.write_text(
    "corpus.n_srams = 30\n"
    "corpus.seed = 12\n"
    "campaign.benchmarks = sobel,blackscholes,kmeans\n"
)

for cmd in (["genmaps"], ["run"], ["report"], ["heatmap", "--method", "hw"]):
    rc = main(["--config", str(cfg_path), "--out", str(out)] + cmd)
    assert rc == 0, f"{cmd} failed with exit code {rc}"

print("\nclassification (share of correct / sdc / crash per arm):")
print((out / "report" / "classification.csv").read_text())
print("outputs under", out)
