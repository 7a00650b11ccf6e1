"""Mine recurring code change patterns from Python repository histories."""

import json

from . import _core
from ._core import PythonSyntaxError, StoreError, call_origin, isomorphic, structural_category

__version__ = _core.__version__

__all__ = [
    "PythonSyntaxError",
    "StoreError",
    "call_origin",
    "canonical_key",
    "change_graphs",
    "export_dot",
    "isomorphic",
    "load_store",
    "mine_patterns",
    "mine_store",
    "parse_repos_file",
    "run_cli",
    "stats",
    "structural_category",
]


def _text(pattern):
    return pattern if isinstance(pattern, str) else json.dumps(pattern)


def change_graphs(before, after, path="module.py", repo_id="", context_hops=1):
    """Change graphs for every modified function between two file versions."""
    return json.loads(_core.change_graphs(before, after, path, repo_id, context_hops))


def parse_repos_file(text):
    return [{"repo_id": r, "url": u, "domain_tag": t} for r, u, t in _core.parse_repos_file(text)]


def mine_store(repos, out, jobs=1, max_files_per_commit=50, skip_merges=True):
    """Mine repositories into a store directory; returns the manifest.

    `repos` holds (repo_id, url_or_path[, domain_tag]) tuples or dicts as
    returned by parse_repos_file.
    """
    specs = []
    for r in repos:
        if isinstance(r, dict):
            specs.append((r["repo_id"], r["url"], r.get("domain_tag", "")))
        else:
            specs.append((r[0], r[1], r[2] if len(r) > 2 else ""))
    return json.loads(_core.mine_store(specs, str(out), jobs, max_files_per_commit, skip_merges))


def load_store(path):
    return json.loads(_core.load_store(str(path)))


def mine_patterns(store, out, min_size=4, min_freq=3, max_size=20, cross_project_only=False,
                  keep_subpatterns=False, jobs=1):
    """Mine patterns from a store into `out`; returns the summary."""
    return json.loads(_core.mine_patterns(str(store), str(out), min_size, min_freq, max_size,
                                          cross_project_only, keep_subpatterns, jobs))


def canonical_key(pattern):
    return _core.canonical_key(_text(pattern))


def export_dot(pattern, title="pattern"):
    return _core.export_dot(_text(pattern), title)


def stats(patterns_dir):
    return _core.stats(str(patterns_dir))


def run_cli(args):
    """Run the command-line tool in process; returns (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
