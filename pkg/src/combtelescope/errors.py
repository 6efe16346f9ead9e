class ContractError(ValueError):
    """An operation was called outside its precondition domain."""
