// Placeholder main; the subcommand wiring lands with the pipeline.
int main() { return 0; }
