# Maps experiment names to their classes; each class docstring is its description
ExperimentRegistry = {}
