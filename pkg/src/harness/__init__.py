# Built-in targets, experiment driver, emitters and the CLI
