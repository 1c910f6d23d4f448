"""Opening articulated objects (drawers, hinged cabinets, ovens) with a
Stretch-like mobile manipulator: geometric perception, sequential IK
planning, base-placement mining, and quasi-static execution."""

__version__ = "0.1.0"
