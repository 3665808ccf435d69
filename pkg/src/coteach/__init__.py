"""Simulator of co-adaptive teacher/student concept learning."""
