"""Tests for the network sampling simulator"""
