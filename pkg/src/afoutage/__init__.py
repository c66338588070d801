"""Outage analysis of dual-hop AF relay selection under co-channel interference."""
