"""Double-SHA-256 mining laboratory.

Modules:

* ``sha256``  - bit-exact reference hash with round-level access
* ``header``  - 80-byte block-header codec, compact targets, difficulty
* ``kernel``  - the optimized, instrumented nonce scanner
* ``costs``   - compression-equivalent and full-adder cost models
* ``rewards`` - halving and smooth-decrement emission schedules
* ``cli``     - operator command-line surface
"""

__version__ = "0.1.0"
