"""Shared CLI invocation matrix for the determinism checks."""

from catsketch import cli


def command_lines(corpus, tmp):
    return {
        "build-model": ["build-model", "--n", 200, "--c", 6, "--d", 32, "--seed", 3, "-o", tmp / "model.txt"],
        "sketch": ["sketch", "-i", corpus, "-m", tmp / "model.txt", "-o", tmp / "sk.txt"],
        "sketch-fh": ["sketch", "-i", corpus, "--method", "fh", "--d", 16, "--seed", 3, "-o", tmp / "fh.txt"],
        "sketch-hlsh": ["sketch", "-i", corpus, "--method", "hlsh", "--d", 16, "-o", tmp / "hl.txt"],
        "estimate": ["estimate", "-s", tmp / "sk.txt", "-o", tmp / "est.csv"],
        "estimate-matrix": ["estimate", "-s", tmp / "fh.txt", "--matrix", "-o", tmp / "estm.csv"],
        "rmse": ["rmse", "-i", corpus, "--dims", "16,32", "--seed", 2, "-o", tmp / "rmse.csv"],
        "mae": ["mae", "-i", corpus, "--method", "sh", "--dims", "16", "--pair-budget", 50, "-o", tmp / "mae.csv"],
        "heatmap": ["heatmap", "-i", corpus, "--d", 32, "--what", "errors", "--csv", tmp / "h.csv",
                    "--pgm", tmp / "h.pgm"],
        "cluster": ["cluster", "-s", tmp / "sk.txt", "--k", 3, "--seed", 1, "-o", tmp / "cl.csv"],
        "cluster-raw": ["cluster", "-i", corpus, "--k", 3, "--seed", 1, "--n-init", 2, "-o", tmp / "cl2.csv"],
        "eval-cluster": ["eval-cluster", "--truth", tmp / "cl2.csv", "--pred", tmp / "cl.csv", "-o", tmp / "ev.txt"],
        "trials": ["trials", "-i", corpus, "--d", 64, "--trials", 20, "--pair", "0,1", "-o", tmp / "tr.txt"],
        "trials-all": ["trials", "-i", corpus, "--d", 64, "--trials", 3, "--stage", "binem", "-o", tmp / "tra.txt"],
        "synth": ["synth", "--points", 5, "--n", 30, "--c", 3, "--max-density", 6, "-o", tmp / "syn.txt"],
    }


def run_all(corpus, tmp, workers):
    tmp.mkdir()
    for name, argv in command_lines(corpus, tmp).items():
        assert cli.main([str(a) for a in argv] + ["--workers", str(workers)]) == 0, name
    return {p.name: p.read_bytes() for p in sorted(tmp.iterdir())}
