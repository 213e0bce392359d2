# Suites — run configuration, suite registry, runner and reports
