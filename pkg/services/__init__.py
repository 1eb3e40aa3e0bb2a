# Services package for the IQP challenge toolkit
