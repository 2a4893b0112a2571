"""DISC adaptive FEM - Source Package."""
