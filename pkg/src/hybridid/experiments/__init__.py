"""End-to-end experiment pipelines (pendulum identification, mini-building control)."""
