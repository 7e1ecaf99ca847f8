# Engines for exdyn: finite semi-flows and complex polynomial dynamics
