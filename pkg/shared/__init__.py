# Shared modules for the IQP challenge toolkit
