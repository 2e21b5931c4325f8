# Test package for the degree bound pipeline
