from . import alice, bob, analysis

__all__ = ["alice", "bob", "analysis"]
