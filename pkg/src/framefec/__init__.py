"""Frame-level RLNC forward error correction with joint source/redundancy rate control."""
__version__ = "0.1.0"
