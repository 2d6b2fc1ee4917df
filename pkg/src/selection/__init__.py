"""Recruit, train and retain: selecting the information leaves of a channel tree."""
