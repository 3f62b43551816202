"""MFCC parameter-sweep harness for binary voice pathology detection."""
