"""Certificates for amoeba and coamoeba membership via sums of squares."""
