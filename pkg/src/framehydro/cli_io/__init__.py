"""Configuration, initial data, snapshot files and the command-line driver."""
