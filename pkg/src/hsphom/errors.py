class DomainError(ValueError):
    """Physically invalid input, tagged with the module that rejected it."""

    def __init__(self, module: str, message: str):
        super().__init__(f"{module}: {message}")
        self.module = module
        self.detail = message
